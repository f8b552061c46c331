"""
TRPO: шаг естественного градиента в доверительной области по KL.

Обращения матрицы Фишера избегаем сопряжёнными градиентами, произведение
Фишер-вектор считаем без построения матрицы.

"""

import logging
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Tuple

import numpy

from prosthetics.algorithms.advantages import normalize_advantages
from prosthetics.algorithms.gaussian import GaussianPolicy, gaussian_logprob, logprob_gradients, policy_kl
from prosthetics.algorithms.ppo import fit_value_net, make_policy, make_value_net
from prosthetics.algorithms.rollouts import TrajectoryBatch
from prosthetics.defaults import DEFAULT_GAE_LAMBDA, DEFAULT_GAMMA, DEFAULT_REWARD_SCALE, HIDDEN_DIMS
from prosthetics.exceptions import ProstheticsConfigError, ProstheticsNumericalError, ProstheticsShapeError
from prosthetics.nn.adam import AdamState
from prosthetics.nn.mlp import MlpParams, backward, jvp

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrpoConfig:
    gamma: float = DEFAULT_GAMMA
    gae_lambda: float = DEFAULT_GAE_LAMBDA
    kl_delta: float = 0.01
    cg_iters: int = 10
    cg_tol: float = 1e-8
    backtrack_coeff: float = 0.8
    backtrack_steps: int = 10
    damping: float = 0.1
    value_lr: float = 1e-3
    value_epochs: int = 5
    minibatch_size: int = 256
    init_log_std: float = -1.6
    episodes_per_batch: int = 4
    reward_scale: float = DEFAULT_REWARD_SCALE
    hidden_dims: Tuple[int, ...] = HIDDEN_DIMS

    def __post_init__(self):
        errors = []
        if not self.kl_delta > 0:
            errors.append(f'trpo.kl_delta must be > 0 (got {self.kl_delta})')
        if self.cg_iters < 1:
            errors.append(f'trpo.cg_iters must be >= 1 (got {self.cg_iters})')
        if not 0 < self.backtrack_coeff < 1:
            errors.append(f'trpo.backtrack_coeff must be in (0, 1) (got {self.backtrack_coeff})')
        if self.backtrack_steps < 1 or self.episodes_per_batch < 1:
            errors.append('trpo.backtrack_steps and trpo.episodes_per_batch must be >= 1')
        if errors:
            raise ProstheticsConfigError(errors=errors)


@dataclass
class TrpoAgent:
    policy: GaussianPolicy
    value_net: MlpParams
    value_opt: AdamState
    kl_delta: float = 0.01
    cg_iters: int = 10
    cg_tol: float = 1e-8
    backtrack_coeff: float = 0.8
    backtrack_steps: int = 10
    damping: float = 0.1
    gamma: float = DEFAULT_GAMMA
    gae_lambda: float = DEFAULT_GAE_LAMBDA
    value_lr: float = 1e-3
    value_epochs: int = 5
    minibatch_size: int = 256
    reward_scale: float = DEFAULT_REWARD_SCALE
    updates: int = field(default=0)

    def __post_init__(self):
        assert self.kl_delta > 0
        assert self.cg_iters >= 1


class TrpoStep(NamedTuple):
    step_accepted: bool
    kl_after: float


def make_trpo_agent(cfg: TrpoConfig, seed: int) -> TrpoAgent:
    rng = numpy.random.default_rng(seed)
    policy = make_policy(cfg.hidden_dims, cfg.init_log_std, int(rng.integers(2 ** 31)))
    value_net = make_value_net(cfg.hidden_dims, int(rng.integers(2 ** 31)))
    return TrpoAgent(
        policy=policy, value_net=value_net, value_opt=AdamState.for_params(value_net),
        kl_delta=cfg.kl_delta, cg_iters=cfg.cg_iters, cg_tol=cfg.cg_tol,
        backtrack_coeff=cfg.backtrack_coeff, backtrack_steps=cfg.backtrack_steps, damping=cfg.damping,
        gamma=cfg.gamma, gae_lambda=cfg.gae_lambda, value_lr=cfg.value_lr, value_epochs=cfg.value_epochs,
        minibatch_size=cfg.minibatch_size, reward_scale=cfg.reward_scale,
    )


def conjugate_gradient(apply_a: Callable[[numpy.ndarray], numpy.ndarray], b: numpy.ndarray,
                       iters: int, tol: float) -> numpy.ndarray:
    """Solve `A x = b` for symmetric positive-definite A given only as a product."""
    x = numpy.zeros_like(b)
    r = b.copy()
    p = r.copy()
    rr = float(r @ r)
    if numpy.sqrt(rr) <= tol:
        return x
    for _ in range(iters):
        ap = apply_a(p)
        p_ap = float(p @ ap)
        if not numpy.isfinite(p_ap) or p_ap <= 0:
            raise ProstheticsNumericalError(f'conjugate gradient met curvature {p_ap}')
        alpha = rr / p_ap
        x = x + alpha * p
        r = r - alpha * ap
        rr_new = float(r @ r)
        if not numpy.isfinite(rr_new):
            raise ProstheticsNumericalError('conjugate gradient residual is not finite')
        if numpy.sqrt(rr_new) <= tol:
            break
        p = r + (rr_new / rr) * p
        rr = rr_new
    return x


def fisher_vector_product(policy: GaussianPolicy, states: numpy.ndarray, v: numpy.ndarray, damping: float) -> numpy.ndarray:
    """
    `H v + damping * v`, H the Hessian of the mean KL at the current policy.

    At the current policy the KL Hessian over the mean network is `J^T diag(1/sigma^2) J / n`
    (J the Jacobian of the mean), and exactly 2 on the log_std diagonal.

    """
    n_net = policy.mean_net.size()
    if v.shape != (n_net + policy.action_dim,):
        raise ProstheticsShapeError(f'expect vector of {n_net + policy.action_dim} values, but got {v.shape}')
    templates = policy.mean_net.arrays()
    tangent, offset = [], 0
    for template in templates:
        tangent.append(v[offset:offset + template.size].reshape(template.shape))
        offset += template.size

    inv_var = numpy.exp(-2.0 * policy.log_std)
    j_v = jvp(policy.mean_net, states, tangent)
    grads = backward(policy.mean_net, states, j_v * inv_var / states.shape[0])
    hv_net = numpy.concatenate([a.ravel() for a in grads.arrays()])
    hv_log_std = 2.0 * v[n_net:]
    return numpy.concatenate([hv_net, hv_log_std]) + damping * v


def surrogate_objective(policy: GaussianPolicy, batch: TrajectoryBatch, advantages: numpy.ndarray) -> float:
    logprobs = gaussian_logprob(policy.mean(batch.obs), policy.log_std, batch.actions)
    return float(numpy.mean(numpy.exp(logprobs - batch.logprobs_old) * advantages))


def trpo_update(agent: TrpoAgent, batch: TrajectoryBatch) -> TrpoStep:
    advantages = normalize_advantages(batch.advantages)
    policy = agent.policy
    n = len(batch)

    # gradient of the surrogate at the old policy, where every ratio is 1
    mean_grad, log_std_grad = logprob_gradients(policy, batch.obs, batch.actions, advantages / n)
    gradient = numpy.concatenate([mean_grad, log_std_grad])
    step = _policy_step(agent, batch, advantages, gradient)
    value_loss = float('nan')

    for _ in range(agent.value_epochs):
        for start in range(0, n, agent.minibatch_size):
            rows = slice(start, start + agent.minibatch_size)
            agent.value_net, agent.value_opt, value_loss = fit_value_net(
                agent.value_net, agent.value_opt, batch.obs[rows], batch.returns[rows], agent.value_lr,
            )
    agent.updates += 1
    logger.debug(f'trpo update {agent.updates}: {step}, value_loss={value_loss:.5f}')
    return step


def _policy_step(agent: TrpoAgent, batch: TrajectoryBatch, advantages: numpy.ndarray, gradient: numpy.ndarray) -> TrpoStep:
    policy = agent.policy
    if not numpy.any(gradient):
        return TrpoStep(step_accepted=False, kl_after=0.0)

    def fvp(v):
        return fisher_vector_product(policy, batch.obs, v, agent.damping)

    try:
        direction = conjugate_gradient(fvp, gradient, agent.cg_iters, agent.cg_tol)
    except ProstheticsNumericalError:
        logger.warning(f'trpo update {agent.updates + 1} skipped: conjugate gradient failed')
        return TrpoStep(step_accepted=False, kl_after=0.0)

    curvature = float(direction @ fvp(direction))
    if not numpy.isfinite(curvature) or curvature <= 0:
        logger.warning(f'trpo update {agent.updates + 1} skipped: curvature {curvature}')
        return TrpoStep(step_accepted=False, kl_after=0.0)

    full_step = numpy.sqrt(2.0 * agent.kl_delta / curvature) * direction
    theta = policy.flat()
    surrogate_before = surrogate_objective(policy, batch, advantages)
    for k in range(agent.backtrack_steps):
        candidate = policy.with_flat(theta + agent.backtrack_coeff ** k * full_step)
        kl = policy_kl(batch.means_old, batch.log_std_old, candidate.mean(batch.obs), candidate.log_std)
        gain = surrogate_objective(candidate, batch, advantages) - surrogate_before
        logger.debug(f'trpo line search {k}: kl={kl:.6f} gain={gain:.6f}')
        if numpy.isfinite(kl) and kl <= agent.kl_delta and gain > 0:
            agent.policy = candidate
            return TrpoStep(step_accepted=True, kl_after=kl)

    logger.info(f'trpo update {agent.updates + 1}: line search exhausted, policy kept')
    return TrpoStep(step_accepted=False, kl_after=0.0)

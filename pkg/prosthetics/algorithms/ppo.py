import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Tuple

import numpy

from prosthetics.algorithms.advantages import normalize_advantages
from prosthetics.algorithms.gaussian import GaussianPolicy, gaussian_logprob, logprob_gradients, policy_kl
from prosthetics.algorithms.rollouts import TrajectoryBatch
from prosthetics.defaults import ACTION_DIM, DEFAULT_GAE_LAMBDA, DEFAULT_GAMMA, DEFAULT_REWARD_SCALE, HIDDEN_DIMS, OBSERVATION_DIM
from prosthetics.exceptions import ProstheticsConfigError, ProstheticsNumericalError
from prosthetics.nn.adam import AdamState, adam_step, adam_update
from prosthetics.nn.mlp import MlpParams, OutputActivation, backward, forward, init_params

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PpoConfig:
    gamma: float = DEFAULT_GAMMA
    gae_lambda: float = DEFAULT_GAE_LAMBDA
    clip_ratio: float = 0.2
    epochs_per_batch: int = 10
    minibatch_size: int = 256
    policy_lr: float = 3e-4
    value_lr: float = 1e-3
    init_log_std: float = -1.6
    episodes_per_batch: int = 4
    reward_scale: float = DEFAULT_REWARD_SCALE
    hidden_dims: Tuple[int, ...] = HIDDEN_DIMS

    def __post_init__(self):
        errors = []
        if not self.clip_ratio > 0:
            errors.append(f'ppo.clip_ratio must be > 0 (got {self.clip_ratio})')
        if self.epochs_per_batch < 1 or self.minibatch_size < 1 or self.episodes_per_batch < 1:
            errors.append('ppo.epochs_per_batch, ppo.minibatch_size and ppo.episodes_per_batch must be >= 1')
        if errors:
            raise ProstheticsConfigError(errors=errors)


@dataclass
class PpoAgent:
    policy: GaussianPolicy
    value_net: MlpParams
    policy_opt: AdamState
    value_opt: AdamState
    clip_ratio: float = 0.2
    gae_lambda: float = DEFAULT_GAE_LAMBDA
    gamma: float = DEFAULT_GAMMA
    epochs_per_batch: int = 10
    minibatch_size: int = 256
    policy_lr: float = 3e-4
    value_lr: float = 1e-3
    reward_scale: float = DEFAULT_REWARD_SCALE
    updates: int = field(default=0)

    def __post_init__(self):
        assert self.clip_ratio > 0
        assert numpy.all(numpy.isfinite(self.policy.log_std))


class PpoLosses(NamedTuple):
    surrogate: float
    value_loss: float
    approx_kl: float
    skipped_minibatches: int


def make_policy(hidden_dims: Tuple[int, ...], init_log_std: float, seed: int,
                obs_dim: int = OBSERVATION_DIM, action_dim: int = ACTION_DIM) -> GaussianPolicy:
    mean_net = init_params((obs_dim, *hidden_dims, action_dim), OutputActivation.UNIT_INTERVAL, seed)
    return GaussianPolicy(mean_net, numpy.full(action_dim, init_log_std))


def make_value_net(hidden_dims: Tuple[int, ...], seed: int, obs_dim: int = OBSERVATION_DIM) -> MlpParams:
    return init_params((obs_dim, *hidden_dims, 1), OutputActivation.IDENTITY, seed)


def make_ppo_agent(cfg: PpoConfig, seed: int) -> PpoAgent:
    rng = numpy.random.default_rng(seed)
    policy = make_policy(cfg.hidden_dims, cfg.init_log_std, int(rng.integers(2 ** 31)))
    value_net = make_value_net(cfg.hidden_dims, int(rng.integers(2 ** 31)))
    return PpoAgent(
        policy=policy, value_net=value_net,
        policy_opt=AdamState.zeros([*policy.mean_net.arrays(), policy.log_std]),
        value_opt=AdamState.for_params(value_net),
        clip_ratio=cfg.clip_ratio, gae_lambda=cfg.gae_lambda, gamma=cfg.gamma,
        epochs_per_batch=cfg.epochs_per_batch, minibatch_size=cfg.minibatch_size,
        policy_lr=cfg.policy_lr, value_lr=cfg.value_lr, reward_scale=cfg.reward_scale,
    )


def clipped_surrogate(ratio: numpy.ndarray, advantages: numpy.ndarray, clip_ratio: float) -> Tuple[numpy.ndarray, numpy.ndarray]:
    """
    Per-sample `min(ratio*A, clip(ratio, 1-c, 1+c)*A)` and its derivative in ratio.

    The derivative is zero whenever the clipped branch is strictly smaller.

    """
    unclipped = ratio * advantages
    clipped = numpy.clip(ratio, 1.0 - clip_ratio, 1.0 + clip_ratio) * advantages
    objective = numpy.minimum(unclipped, clipped)
    d_ratio = numpy.where(unclipped <= clipped, advantages, 0.0)
    return objective, d_ratio


def fit_value_net(value_net: MlpParams, opt: AdamState, obs: numpy.ndarray, returns: numpy.ndarray,
                  lr: float) -> Tuple[MlpParams, AdamState, float]:
    """One squared-error regression step of the value net toward `returns`."""
    n = obs.shape[0]
    values = forward(value_net, obs)[:, 0]
    loss = float(numpy.mean((values - returns) ** 2))
    grads = backward(value_net, obs, (2.0 * (values - returns) / n)[:, None])
    value_net, opt = adam_update(value_net, grads, opt, lr)
    return value_net, opt, loss


def ppo_update(agent: PpoAgent, batch: TrajectoryBatch, rng: numpy.random.Generator) -> PpoLosses:
    advantages = normalize_advantages(batch.advantages)
    n = len(batch)
    surrogates, value_losses = [], []
    skipped = 0

    for _ in range(agent.epochs_per_batch):
        order = rng.permutation(n)
        for start in range(0, n, agent.minibatch_size):
            idx = order[start:start + agent.minibatch_size]
            try:
                surrogate = _policy_step(agent, batch, advantages, idx)
            except ProstheticsNumericalError:
                logger.warning(f'ppo minibatch of {idx.shape[0]} samples skipped after non-finite ratio')
                skipped += 1
            else:
                surrogates.append(surrogate)
            agent.value_net, agent.value_opt, value_loss = fit_value_net(
                agent.value_net, agent.value_opt, batch.obs[idx], batch.returns[idx], agent.value_lr,
            )
            value_losses.append(value_loss)

    agent.updates += 1
    approx_kl = policy_kl(batch.means_old, batch.log_std_old, agent.policy.mean(batch.obs), agent.policy.log_std)
    losses = PpoLosses(
        surrogate=float(numpy.mean(surrogates)) if surrogates else 0.0,
        value_loss=float(numpy.mean(value_losses)),
        approx_kl=approx_kl,
        skipped_minibatches=skipped,
    )
    logger.debug(f'ppo update {agent.updates}: {losses}')
    return losses


def _policy_step(agent: PpoAgent, batch: TrajectoryBatch, advantages: numpy.ndarray, idx: numpy.ndarray) -> float:
    policy = agent.policy
    obs, actions = batch.obs[idx], batch.actions[idx]
    logprobs = gaussian_logprob(policy.mean(obs), policy.log_std, actions)
    ratio = numpy.exp(logprobs - batch.logprobs_old[idx])
    if not numpy.all(numpy.isfinite(ratio)):
        raise ProstheticsNumericalError('non-finite ppo probability ratio')

    objective, d_ratio = clipped_surrogate(ratio, advantages[idx], agent.clip_ratio)
    # minimise -mean(objective); d ratio / d logprob = ratio
    weights = -d_ratio * ratio / idx.shape[0]
    mean_grad, log_std_grad = logprob_gradients(policy, obs, actions, weights)

    arrays = [*policy.mean_net.arrays(), policy.log_std]
    grads = _split_like(policy.mean_net.arrays(), mean_grad) + [log_std_grad]
    new_arrays, agent.policy_opt = adam_step(arrays, grads, agent.policy_opt, agent.policy_lr)
    agent.policy = GaussianPolicy(policy.mean_net.with_arrays(new_arrays[:-1]), new_arrays[-1])
    return float(numpy.mean(objective))


def _split_like(templates, flat: numpy.ndarray):
    ret, offset = [], 0
    for template in templates:
        ret.append(flat[offset:offset + template.size].reshape(template.shape))
        offset += template.size
    return ret

"""
DDPG: off-policy actor-critic с буфером воспроизведения и целевыми сетями.

Исследовательский шум - некоррелированный гауссов (а не процесс Орнштейна-Уленбека).

"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, Tuple, Union

import numpy

from prosthetics.algorithms.replay import Transition, TransitionBatch, as_batch
from prosthetics.defaults import ACTION_DIM, DEFAULT_GAMMA, DEFAULT_REWARD_SCALE, HIDDEN_DIMS, OBSERVATION_DIM
from prosthetics.exceptions import ProstheticsConfigError, ProstheticsNumericalError, ProstheticsShapeError
from prosthetics.nn.adam import AdamState, adam_update
from prosthetics.nn.mlp import MlpParams, OutputActivation, backward, forward, init_params

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DdpgConfig:
    gamma: float = DEFAULT_GAMMA
    tau: float = 0.005
    noise_sigma: float = 0.1
    batch_size: int = 128
    actor_lr: float = 1e-4
    critic_lr: float = 1e-3
    buffer_capacity: int = 1_000_000
    warmup_steps: int = 1000
    update_every: int = 1
    reward_scale: float = DEFAULT_REWARD_SCALE
    hidden_dims: Tuple[int, ...] = HIDDEN_DIMS

    def __post_init__(self):
        errors = []
        if not 0 < self.tau <= 1:
            errors.append(f'ddpg.tau must be in (0, 1] (got {self.tau})')
        if not 0 <= self.gamma <= 1:
            errors.append(f'ddpg.gamma must be in [0, 1] (got {self.gamma})')
        if self.noise_sigma < 0:
            errors.append(f'ddpg.noise_sigma must be >= 0 (got {self.noise_sigma})')
        if self.batch_size < 1 or self.buffer_capacity < self.batch_size:
            errors.append(f'ddpg.batch_size must be in [1, buffer_capacity] (got {self.batch_size})')
        if self.update_every < 1:
            errors.append(f'ddpg.update_every must be >= 1 (got {self.update_every})')
        if errors:
            raise ProstheticsConfigError(errors=errors)


@dataclass
class DdpgAgent:
    actor: MlpParams
    critic: MlpParams
    target_actor: MlpParams
    target_critic: MlpParams
    actor_opt: AdamState
    critic_opt: AdamState
    gamma: float = DEFAULT_GAMMA
    tau: float = 0.005
    noise_sigma: float = 0.1
    batch_size: int = 128
    actor_lr: float = 1e-4
    critic_lr: float = 1e-3
    reward_scale: float = DEFAULT_REWARD_SCALE
    updates: int = field(default=0)

    def __post_init__(self):
        assert self.target_actor.layer_dims == self.actor.layer_dims
        assert self.target_critic.layer_dims == self.critic.layer_dims
        assert 0 < self.tau <= 1
        assert 0 <= self.gamma <= 1


def make_ddpg_agent(cfg: DdpgConfig, seed: int, obs_dim: int = OBSERVATION_DIM, action_dim: int = ACTION_DIM) -> DdpgAgent:
    rng = numpy.random.default_rng(seed)
    actor = init_params((obs_dim, *cfg.hidden_dims, action_dim), OutputActivation.UNIT_INTERVAL, int(rng.integers(2 ** 31)))
    critic = init_params((obs_dim + action_dim, *cfg.hidden_dims, 1), OutputActivation.IDENTITY, int(rng.integers(2 ** 31)))
    return DdpgAgent(
        actor=actor, critic=critic, target_actor=actor, target_critic=critic,
        actor_opt=AdamState.for_params(actor), critic_opt=AdamState.for_params(critic),
        gamma=cfg.gamma, tau=cfg.tau, noise_sigma=cfg.noise_sigma, batch_size=cfg.batch_size,
        actor_lr=cfg.actor_lr, critic_lr=cfg.critic_lr, reward_scale=cfg.reward_scale,
    )


def ddpg_act(agent: DdpgAgent, obs: numpy.ndarray, explore: bool, rng: numpy.random.Generator) -> numpy.ndarray:
    action = forward(agent.actor, obs)
    if explore:
        action = numpy.clip(action + rng.normal(0.0, agent.noise_sigma, size=action.shape), 0.0, 1.0)
    return action


def critic_targets(agent: DdpgAgent, batch: TransitionBatch) -> numpy.ndarray:
    next_actions = forward(agent.target_actor, batch.next_obs)
    next_q = forward(agent.target_critic, numpy.hstack([batch.next_obs, next_actions]))[:, 0]
    return agent.reward_scale * batch.rewards + agent.gamma * (1.0 - batch.dones) * next_q


def soft_update(target: MlpParams, online: MlpParams, tau: float) -> MlpParams:
    if target.layer_dims != online.layer_dims:
        raise ProstheticsShapeError(f'can not blend {target} into {online}')
    return target.with_arrays([
        tau * online_array + (1.0 - tau) * target_array
        for target_array, online_array in zip(target.arrays(), online.arrays())
    ])


def ddpg_update(agent: DdpgAgent, batch: Union[TransitionBatch, Iterable[Transition]]) -> Tuple[float, float]:
    """
    One critic regression step, one actor ascent step, then both soft target updates.

    Returns the critic loss and the actor objective, both measured before the step.
    Raises ProstheticsNumericalError and leaves the agent untouched on non-finite values.

    """
    batch = as_batch(batch)
    n = len(batch)
    if n == 0:
        raise ProstheticsShapeError('ddpg update needs a nonempty batch')

    targets = critic_targets(agent, batch)
    critic_input = numpy.hstack([batch.obs, batch.actions])
    q = forward(agent.critic, critic_input)[:, 0]
    critic_loss = float(numpy.mean((q - targets) ** 2))
    if not numpy.isfinite(critic_loss):
        raise ProstheticsNumericalError(f'non-finite ddpg critic loss after {agent.updates} updates')

    critic_grads = backward(agent.critic, critic_input, (2.0 * (q - targets) / n)[:, None])
    critic, critic_opt = adam_update(agent.critic, critic_grads, agent.critic_opt, agent.critic_lr)

    # actor ascends Q(s, actor(s)) through the freshly updated critic, critic held fixed
    policy_actions = forward(agent.actor, batch.obs)
    policy_input = numpy.hstack([batch.obs, policy_actions])
    actor_objective = float(numpy.mean(forward(critic, policy_input)))
    if not numpy.isfinite(actor_objective):
        raise ProstheticsNumericalError(f'non-finite ddpg actor objective after {agent.updates} updates')
    q_grads = backward(critic, policy_input, numpy.full((n, 1), -1.0 / n))
    action_grads = q_grads.input_grad[:, batch.obs.shape[1]:]
    actor_grads = backward(agent.actor, batch.obs, action_grads)
    actor, actor_opt = adam_update(agent.actor, actor_grads, agent.actor_opt, agent.actor_lr)

    agent.critic, agent.critic_opt = critic, critic_opt
    agent.actor, agent.actor_opt = actor, actor_opt
    agent.target_critic = soft_update(agent.target_critic, critic, agent.tau)
    agent.target_actor = soft_update(agent.target_actor, actor, agent.tau)
    agent.updates += 1
    logger.debug(f'ddpg update {agent.updates}: critic_loss={critic_loss:.5f} actor_objective={actor_objective:.5f}')
    return critic_loss, actor_objective

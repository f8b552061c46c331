from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy

from prosthetics.algorithms.advantages import gae_advantages
from prosthetics.algorithms.gaussian import GaussianPolicy, gaussian_logprob
from prosthetics.calculators import episode_return
from prosthetics.nn.mlp import MlpParams, forward
from prosthetics.stander import StanderEnv


@dataclass(frozen=True, eq=False)
class Episode:
    obs: numpy.ndarray
    actions: numpy.ndarray
    rewards: numpy.ndarray
    final_obs: numpy.ndarray
    fell: bool

    @property
    def length(self) -> int:
        return self.rewards.shape[0]

    @property
    def total_reward(self) -> float:
        return episode_return(self.rewards)


@dataclass(frozen=True, eq=False)
class TrajectoryBatch:
    obs: numpy.ndarray
    actions: numpy.ndarray
    logprobs_old: numpy.ndarray
    means_old: numpy.ndarray
    log_std_old: numpy.ndarray
    advantages: numpy.ndarray
    returns: numpy.ndarray

    def __len__(self):
        return self.obs.shape[0]


def run_episode(env: StanderEnv, act: Callable[[numpy.ndarray], numpy.ndarray], episode_seed: int,
                max_steps: Optional[int] = None,
                on_step: Optional[Callable[[numpy.ndarray, numpy.ndarray, float, numpy.ndarray, bool], None]] = None) -> Episode:
    """Roll one episode; `act` sees every observation, `on_step(obs, action, reward, next_obs, fell)` every transition."""
    obs = env.reset(episode_seed)
    observations, actions, rewards = [], [], []
    fell = False
    limit = env.cfg.max_steps if max_steps is None else min(max_steps, env.cfg.max_steps)
    for _ in range(limit):
        action = act(obs)
        result = env.step(action)
        observations.append(obs)
        actions.append(action)
        rewards.append(result.reward)
        if on_step is not None:
            on_step(obs, action, result.reward, result.observation, result.fall)
        obs = result.observation
        fell = result.fall
        if result.done:
            break
    return Episode(
        obs=numpy.array(observations), actions=numpy.array(actions), rewards=numpy.array(rewards),
        final_obs=obs, fell=fell,
    )


def build_trajectory_batch(policy: GaussianPolicy, value_net: MlpParams, episodes: Sequence[Episode],
                           gamma: float, lam: float, reward_scale: float) -> TrajectoryBatch:
    advantages: List[numpy.ndarray] = []
    returns: List[numpy.ndarray] = []
    for episode in episodes:
        values = forward(value_net, episode.obs)[:, 0]
        last_value = 0.0 if episode.fell else float(forward(value_net, episode.final_obs)[0])
        dones = numpy.zeros(episode.length)
        dones[-1] = float(episode.fell)
        adv, ret = gae_advantages(reward_scale * episode.rewards, values, last_value, dones, gamma, lam)
        advantages.append(adv)
        returns.append(ret)

    obs = numpy.concatenate([e.obs for e in episodes])
    actions = numpy.concatenate([e.actions for e in episodes])
    means = policy.mean(obs)
    return TrajectoryBatch(
        obs=obs, actions=actions,
        logprobs_old=gaussian_logprob(means, policy.log_std, actions),
        means_old=means, log_std_old=policy.log_std.copy(),
        advantages=numpy.concatenate(advantages), returns=numpy.concatenate(returns),
    )

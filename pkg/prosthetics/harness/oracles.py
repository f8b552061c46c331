"""
Независимые эталоны для проверки численных операций и гейтов DAgger.

Каждый эталон считает то же самое другим, заведомо простым способом:
прямой двойной суммой, плотным решением системы, повторной симуляцией с нуля.

"""

from typing import Optional, Sequence

import numpy

from prosthetics.imitation.policy import Policy
from prosthetics.stander import EnvConfig, StanderEnv


def gae_double_sum(rewards, values, last_value: float, dones, gamma: float, lam: float) -> numpy.ndarray:
    rewards = numpy.asarray(rewards, dtype=numpy.float64)
    values = numpy.asarray(values, dtype=numpy.float64)
    dones = numpy.asarray(dones, dtype=numpy.float64)
    n = rewards.shape[0]
    next_values = numpy.append(values[1:], last_value)
    deltas = rewards + gamma * (1.0 - dones) * next_values - values

    advantages = numpy.zeros(n)
    for t in range(n):
        total, weight = 0.0, 1.0
        for k in range(t, n):
            total += weight * deltas[k]
            weight *= gamma * lam * (1.0 - dones[k])
        advantages[t] = total
    return advantages


def dense_solve(matrix: numpy.ndarray, b: numpy.ndarray) -> numpy.ndarray:
    return numpy.linalg.solve(matrix, b)


def random_spd(dim: int, rng: numpy.random.Generator) -> numpy.ndarray:
    a = rng.normal(size=(dim, dim))
    return a @ a.T + dim * numpy.eye(dim)


def kl_per_dim(mean_old: float, std_old: float, mean_new: float, std_new: float) -> float:
    return float(numpy.log(std_new / std_old) + (std_old ** 2 + (mean_old - mean_new) ** 2) / (2 * std_new ** 2) - 0.5)


def replay_to(cfg: EnvConfig, episode_seed: int, history: Sequence[numpy.ndarray]) -> StanderEnv:
    """Fresh environment driven through `history` from reset."""
    env = StanderEnv(cfg)
    env.reset(episode_seed)
    for action in history:
        env.step(action)
    return env


def resimulated_reward(cfg: EnvConfig, episode_seed: int, history: Sequence[numpy.ndarray], action: numpy.ndarray) -> float:
    return replay_to(cfg, episode_seed, history).step(action).reward


def resimulated_return(cfg: EnvConfig, episode_seed: int, history: Sequence[numpy.ndarray], first_action: numpy.ndarray,
                       policy: Policy, horizon: Optional[int] = None) -> float:
    env = replay_to(cfg, episode_seed, history)
    rewards = []
    result = env.step(first_action)
    rewards.append(result.reward)
    while not result.done and (horizon is None or len(rewards) < horizon):
        result = env.step(policy.act(result.observation))
        rewards.append(result.reward)
    return float(sum(rewards))


def gate_oracle(value_expert: float, value_target: float) -> bool:
    """expert_won for a pair of branch values, ties to the expert."""
    return not value_expert < value_target

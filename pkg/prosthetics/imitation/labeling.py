"""
Разметка состояний для DAgger.

Гейты сравнивают действие эксперта и действие ученика из одного и того же
сохранённого состояния среды; после сравнения среда возвращается в снимок.
При равенстве наград побеждает эксперт.

"""

from typing import NamedTuple, Optional, Tuple

import numpy

from prosthetics.exceptions import ProstheticsConfigError
from prosthetics.imitation.policy import Policy
from prosthetics.stander import EnvSnapshot, StanderEnv


class GateDecision(NamedTuple):
    label: numpy.ndarray
    expert_won: bool


def label_vanilla(expert: Policy, obs: numpy.ndarray) -> numpy.ndarray:
    return expert.act(obs)


def label_reward_gated(env: StanderEnv, snap: EnvSnapshot, a_expert: numpy.ndarray, a_target: numpy.ndarray) -> GateDecision:
    env.restore(snap)
    r_expert = env.step(a_expert).reward
    env.restore(snap)
    r_target = env.step(a_target).reward
    env.restore(snap)
    return _gate(a_expert, a_target, r_expert, r_target)


def branch_return(env: StanderEnv, snap: EnvSnapshot, first_action: numpy.ndarray, policy: Policy,
                  horizon: Optional[int] = None) -> float:
    """Undiscounted return of `first_action` then `policy`, for `horizon` steps or to the episode end."""
    env.restore(snap)
    result = env.step(first_action)
    total, steps = result.reward, 1
    while not result.done and (horizon is None or steps < horizon):
        result = env.step(policy.act(result.observation))
        total += result.reward
        steps += 1
    return total


def label_return_gated(env: StanderEnv, snap: EnvSnapshot, a_expert: numpy.ndarray, a_target: numpy.ndarray,
                       expert: Policy, target: Policy, horizon: Optional[int] = None) -> GateDecision:
    if horizon is not None and horizon < 1:
        raise ProstheticsConfigError(f'rollout horizon must be >= 1 (got {horizon})')
    g_expert = branch_return(env, snap, a_expert, expert, horizon)
    g_target = branch_return(env, snap, a_target, target, horizon)
    env.restore(snap)
    return _gate(a_expert, a_target, g_expert, g_target)


def select_action_epsilon(a_expert: numpy.ndarray, a_target: numpy.ndarray, epsilon: float,
                          rng: numpy.random.Generator) -> Tuple[numpy.ndarray, bool]:
    if not 0 <= epsilon <= 1:
        raise ProstheticsConfigError(f'epsilon must be in [0, 1] (got {epsilon})')
    took_expert = bool(rng.random() < epsilon)
    return (a_expert if took_expert else a_target), took_expert


def _gate(a_expert, a_target, value_expert: float, value_target: float) -> GateDecision:
    if value_expert < value_target:
        return GateDecision(label=a_target, expert_won=False)
    return GateDecision(label=a_expert, expert_won=True)

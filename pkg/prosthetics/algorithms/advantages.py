from typing import Tuple

import numpy

from prosthetics.exceptions import ProstheticsShapeError

ADVANTAGE_VARIANCE_FLOOR = 1e-8


def gae_advantages(rewards, values, last_value: float, dones, gamma: float,
                   lam: float) -> Tuple[numpy.ndarray, numpy.ndarray]:
    """
    Generalized advantage estimation over one trajectory.

    `dones[t]` marks a terminal transition at step t: nothing is bootstrapped past it.
    `last_value` is the value of the state following the final step.

    """
    rewards = numpy.asarray(rewards, dtype=numpy.float64)
    values = numpy.asarray(values, dtype=numpy.float64)
    dones = numpy.asarray(dones, dtype=numpy.float64)
    if not rewards.shape == values.shape == dones.shape or rewards.ndim != 1:
        raise ProstheticsShapeError(
            f'rewards {rewards.shape}, values {values.shape} and dones {dones.shape} must be equal-length vectors',
        )

    advantages = numpy.zeros_like(rewards)
    running = 0.0
    for t in reversed(range(rewards.shape[0])):
        next_value = last_value if t == rewards.shape[0] - 1 else values[t + 1]
        not_done = 1.0 - dones[t]
        delta = rewards[t] + gamma * next_value * not_done - values[t]
        running = delta + gamma * lam * not_done * running
        advantages[t] = running
    return advantages, advantages + values


def normalize_advantages(advantages: numpy.ndarray) -> numpy.ndarray:
    """Zero mean, unit variance; returned unchanged when the variance is negligible."""
    variance = float(numpy.var(advantages))
    if variance < ADVANTAGE_VARIANCE_FLOOR:
        return advantages
    return (advantages - numpy.mean(advantages)) / numpy.sqrt(variance)

"""Награда ProstheticsEnv: отрицательное отклонение скорости таза от желаемой."""

from prosthetics.defaults import MAX_TIMESTEP_REWARD


def reward_fn(v: float, v_star: float) -> float:
    """Timestep reward `9 - (v_star - v)^2`; peaks at 9 exactly when `v == v_star`."""
    return MAX_TIMESTEP_REWARD - (v_star - v) ** 2


def episode_return(rewards) -> float:
    return float(sum(rewards))

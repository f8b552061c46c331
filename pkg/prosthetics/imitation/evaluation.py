import math
from typing import NamedTuple

import numpy

from prosthetics.algorithms.rollouts import run_episode
from prosthetics.exceptions import ProstheticsConfigError
from prosthetics.imitation.policy import Policy
from prosthetics.stander import StanderEnv


class EvalResult(NamedTuple):
    mean_return: float
    max_return: float


def evaluate(policy: Policy, env: StanderEnv, episodes: int, seed: int) -> EvalResult:
    """Run the deterministic policy for `episodes` fresh episodes whose seeds derive from `seed`."""
    if episodes < 1:
        raise ProstheticsConfigError(f'evaluation needs at least one episode (got {episodes})')
    episode_seeds = numpy.random.default_rng(seed).integers(2 ** 31, size=episodes)
    returns = [run_episode(env, policy.act, int(s)).total_reward for s in episode_seeds]
    max_return = max(returns)
    # the mean of equal returns can round one ulp above them
    return EvalResult(mean_return=min(math.fsum(returns) / len(returns), max_return), max_return=max_return)

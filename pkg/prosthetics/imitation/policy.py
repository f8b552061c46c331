from typing import Protocol, Sequence, Tuple

import numpy

from prosthetics.defaults import ACTION_DIM, HIDDEN_DIMS, OBSERVATION_DIM
from prosthetics.exceptions import ProstheticsShapeError
from prosthetics.nn.adam import AdamState, adam_update
from prosthetics.nn.mlp import MlpParams, OutputActivation, backward, forward, init_params


class Policy(Protocol):
    def act(self, obs: numpy.ndarray) -> numpy.ndarray:
        ...


class MlpPolicy:
    """Deterministic observation -> muscle action map, a DAgger learner or an expert actor."""

    def __init__(self, params: MlpParams):
        if params.input_dim != OBSERVATION_DIM or params.output_dim != ACTION_DIM:
            raise ProstheticsShapeError(f'policy must map {OBSERVATION_DIM} -> {ACTION_DIM}, but got {params}')
        self.params = params

    @classmethod
    def fresh(cls, seed: int, hidden_dims: Sequence[int] = HIDDEN_DIMS) -> 'MlpPolicy':
        return cls(init_params((OBSERVATION_DIM, *hidden_dims, ACTION_DIM), OutputActivation.UNIT_INTERVAL, seed))

    def act(self, obs: numpy.ndarray) -> numpy.ndarray:
        return forward(self.params, obs)

    def __str__(self):
        return f'MlpPolicy({self.params})'


def regression_loss(params: MlpParams, obs: numpy.ndarray, labels: numpy.ndarray) -> float:
    return float(numpy.mean((forward(params, obs) - labels) ** 2))


def fit_policy(params: MlpParams, obs: numpy.ndarray, labels: numpy.ndarray, epochs: int, lr: float,
               minibatch_size: int, rng: numpy.random.Generator) -> Tuple[MlpParams, float, float]:
    """
    Mean-squared-error regression of the policy output onto `labels`.

    Runs `epochs` full passes of shuffled minibatches with a fresh Adam state.
    Returns the new params and the full-dataset loss before and after.

    """
    if obs.shape[0] != labels.shape[0]:
        raise ProstheticsShapeError(f'{obs.shape[0]} observations but {labels.shape[0]} labels')
    loss_before = regression_loss(params, obs, labels)
    opt = AdamState.for_params(params)
    n = obs.shape[0]
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, minibatch_size):
            idx = order[start:start + minibatch_size]
            out = forward(params, obs[idx])
            upstream = 2.0 * (out - labels[idx]) / out.size
            params, opt = adam_update(params, backward(params, obs[idx], upstream), opt, lr)
    return params, loss_before, regression_loss(params, obs, labels)

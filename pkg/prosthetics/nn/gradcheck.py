import logging
from typing import Callable, NamedTuple, Sequence

import numpy

from prosthetics.nn.mlp import MlpParams, OutputActivation, backward, flatten, forward, init_params, unflatten

logger = logging.getLogger(__name__)

GRADCHECK_STEP = 1e-5
RELATIVE_FLOOR = 1e-5


class GradCheckResult(NamedTuple):
    max_relative_error: float
    n_params: int
    architecture: str


def relative_error(analytic: numpy.ndarray, numeric: numpy.ndarray) -> float:
    denom = numpy.maximum(numpy.abs(analytic) + numpy.abs(numeric), RELATIVE_FLOOR)
    return float(numpy.max(numpy.abs(analytic - numeric) / denom))


def central_differences(fn: Callable[[numpy.ndarray], float], theta: numpy.ndarray, h: float = GRADCHECK_STEP) -> numpy.ndarray:
    grad = numpy.zeros_like(theta)
    for i in range(theta.size):
        shifted = theta.copy()
        shifted[i] = theta[i] + h
        plus = fn(shifted)
        shifted[i] = theta[i] - h
        minus = fn(shifted)
        grad[i] = (plus - minus) / (2.0 * h)
    return grad


def check_mlp_gradients(params: MlpParams, x: numpy.ndarray, upstream: numpy.ndarray,
                        h: float = GRADCHECK_STEP) -> GradCheckResult:
    """Compare backward() against central differences for parameters and input."""
    def loss_of_params(theta):
        return float(numpy.sum(forward(unflatten(params, theta), x) * upstream))

    def loss_of_input(flat_x):
        return float(numpy.sum(forward(params, flat_x.reshape(numpy.shape(x))) * upstream))

    bundle = backward(params, x, upstream)
    analytic = numpy.concatenate([numpy.concatenate([a.ravel() for a in bundle.arrays()]), numpy.ravel(bundle.input_grad)])
    numeric = numpy.concatenate([
        central_differences(loss_of_params, flatten(params), h),
        central_differences(loss_of_input, numpy.ravel(numpy.asarray(x, dtype=numpy.float64)), h),
    ])
    return GradCheckResult(relative_error(analytic, numeric), params.size(), str(params))


def random_gradchecks(n_checks: int, seed: int, hidden_choices: Sequence[int] = (3, 8, 16)) -> Sequence[GradCheckResult]:
    rng = numpy.random.default_rng(seed)
    results = []
    for i in range(n_checks):
        n_hidden = int(rng.integers(0, 3))
        dims = [int(rng.integers(1, 7))]
        dims += [int(rng.choice(hidden_choices)) for _ in range(n_hidden)]
        dims.append(int(rng.integers(1, 7)))
        activation = OutputActivation.UNIT_INTERVAL if i % 2 else OutputActivation.IDENTITY
        params = init_params(dims, activation, seed=int(rng.integers(2 ** 31)))
        batch = int(rng.integers(1, 5))
        x = rng.normal(size=(batch, dims[0]))
        upstream = rng.normal(size=(batch, dims[-1]))
        result = check_mlp_gradients(params, x, upstream)
        logger.debug(f'gradcheck {result.architecture}: {result.max_relative_error:.3e}')
        results.append(result)
    return results

"""Adam with bias correction, over any list of parameter arrays."""

from dataclasses import dataclass, replace
from typing import List, Sequence, Tuple

import numpy

from prosthetics.exceptions import ProstheticsNumericalError, ProstheticsShapeError
from prosthetics.nn.mlp import GradBundle, MlpParams


@dataclass(frozen=True, eq=False)
class AdamState:
    first_moment: Tuple[numpy.ndarray, ...]
    second_moment: Tuple[numpy.ndarray, ...]
    step_count: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon_stab: float = 1e-8

    @classmethod
    def zeros(cls, arrays: Sequence[numpy.ndarray], **hyper) -> 'AdamState':
        return cls(
            first_moment=tuple(numpy.zeros_like(a) for a in arrays),
            second_moment=tuple(numpy.zeros_like(a) for a in arrays),
            **hyper,
        )

    @classmethod
    def for_params(cls, params: MlpParams, **hyper) -> 'AdamState':
        return cls.zeros(params.arrays(), **hyper)


def adam_step(arrays: Sequence[numpy.ndarray], grads: Sequence[numpy.ndarray], state: AdamState,
              lr: float) -> Tuple[List[numpy.ndarray], AdamState]:
    if len(arrays) != len(grads) or len(arrays) != len(state.first_moment):
        raise ProstheticsShapeError(
            f'adam got {len(arrays)} parameters, {len(grads)} gradients and {len(state.first_moment)} moments',
        )
    for param, grad in zip(arrays, grads):
        if param.shape != grad.shape:
            raise ProstheticsShapeError(f'gradient shape {grad.shape} does not match parameter shape {param.shape}')
        if not numpy.all(numpy.isfinite(grad)):
            raise ProstheticsNumericalError('non-finite gradient, adam update rejected')

    step_count = state.step_count + 1
    first_correction = 1.0 - state.beta1 ** step_count
    second_correction = 1.0 - state.beta2 ** step_count

    new_arrays, first, second = [], [], []
    for param, grad, m, v in zip(arrays, grads, state.first_moment, state.second_moment):
        m = state.beta1 * m + (1.0 - state.beta1) * grad
        v = state.beta2 * v + (1.0 - state.beta2) * grad ** 2
        m_hat = m / first_correction
        v_hat = v / second_correction
        new_arrays.append(param - lr * m_hat / (numpy.sqrt(v_hat) + state.epsilon_stab))
        first.append(m)
        second.append(v)

    return new_arrays, replace(state, first_moment=tuple(first), second_moment=tuple(second), step_count=step_count)


def adam_update(params: MlpParams, grads: GradBundle, state: AdamState, lr: float) -> Tuple[MlpParams, AdamState]:
    new_arrays, new_state = adam_step(params.arrays(), grads.arrays(), state, lr)
    return params.with_arrays(new_arrays), new_state

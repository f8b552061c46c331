"""
Полносвязная сеть (MLP) для актёров, критиков и функций ценности.

Скрытые слои - affine + tanh, выходной слой - affine + выходная активация.
Батч передаётся двумерным массивом, одна строка на пример.

"""

from dataclasses import dataclass
from enum import Enum, unique
from typing import List, Sequence, Tuple

import numpy

from prosthetics.exceptions import ProstheticsConfigError, ProstheticsShapeError


@unique
class OutputActivation(Enum):
    IDENTITY = 'identity'
    UNIT_INTERVAL = 'unit_interval'

    def __str__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class MlpParams:
    layer_dims: Tuple[int, ...]
    weights: Tuple[numpy.ndarray, ...]
    biases: Tuple[numpy.ndarray, ...]
    output_activation: OutputActivation = OutputActivation.IDENTITY

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def output_dim(self) -> int:
        return self.layer_dims[-1]

    def arrays(self) -> List[numpy.ndarray]:
        """Parameters in canonical order: W0, b0, W1, b1, ..."""
        ret = []
        for weight, bias in zip(self.weights, self.biases):
            ret.extend((weight, bias))
        return ret

    def with_arrays(self, arrays: Sequence[numpy.ndarray]) -> 'MlpParams':
        if len(arrays) != 2 * self.n_layers:
            raise ProstheticsShapeError(f'expect {2 * self.n_layers} arrays, but got {len(arrays)}')
        for own, other in zip(self.arrays(), arrays):
            if own.shape != other.shape:
                raise ProstheticsShapeError(f'expect array of shape {own.shape}, but got {other.shape}')
        return MlpParams(
            layer_dims=self.layer_dims,
            weights=tuple(arrays[0::2]),
            biases=tuple(arrays[1::2]),
            output_activation=self.output_activation,
        )

    def size(self) -> int:
        return sum(a.size for a in self.arrays())

    def __str__(self):
        dims = '-'.join(str(d) for d in self.layer_dims)
        return f'MLP {dims} ({self.output_activation})'


@dataclass(frozen=True, eq=False)
class GradBundle:
    weights: Tuple[numpy.ndarray, ...]
    biases: Tuple[numpy.ndarray, ...]
    input_grad: numpy.ndarray
    loss: float

    def arrays(self) -> List[numpy.ndarray]:
        ret = []
        for weight, bias in zip(self.weights, self.biases):
            ret.extend((weight, bias))
        return ret


def init_params(layer_dims: Sequence[int], output_activation: OutputActivation = OutputActivation.IDENTITY,
                seed: int = 0) -> MlpParams:
    dims = tuple(int(d) for d in layer_dims)
    if len(dims) < 2:
        raise ProstheticsConfigError(f'an MLP needs at least input and output dims, got {dims}')
    if any(d < 1 for d in dims):
        raise ProstheticsConfigError(f'layer dims must be positive, got {dims}')

    rng = numpy.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = numpy.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(numpy.zeros(fan_out))
    return MlpParams(dims, tuple(weights), tuple(biases), OutputActivation(output_activation))


def zeros_like(params: MlpParams) -> MlpParams:
    return params.with_arrays([numpy.zeros_like(a) for a in params.arrays()])


def flatten(params: MlpParams) -> numpy.ndarray:
    return numpy.concatenate([a.ravel() for a in params.arrays()])


def unflatten(params: MlpParams, flat: numpy.ndarray) -> MlpParams:
    """Inverse of flatten(), using `params` as the shape template."""
    flat = numpy.asarray(flat, dtype=numpy.float64)
    if flat.shape != (params.size(),):
        raise ProstheticsShapeError(f'expect flat vector of {params.size()} values, but got shape {flat.shape}')
    arrays, offset = [], 0
    for template in params.arrays():
        arrays.append(flat[offset:offset + template.size].reshape(template.shape).copy())
        offset += template.size
    return params.with_arrays(arrays)


SIGMOID_FLOOR = numpy.finfo(numpy.float64).tiny
SIGMOID_CEIL = numpy.nextafter(1.0, 0.0)


def sigmoid(z: numpy.ndarray) -> numpy.ndarray:
    """Logistic function, strictly inside (0, 1) even for saturating inputs."""
    z = numpy.asarray(z, dtype=numpy.float64)
    decay = numpy.exp(-numpy.abs(z))
    out = numpy.where(z >= 0, 1.0 / (1.0 + decay), decay / (1.0 + decay))
    return numpy.clip(out, SIGMOID_FLOOR, SIGMOID_CEIL)


def forward(params: MlpParams, x) -> numpy.ndarray:
    batch, single = _as_batch(params, x)
    out = _trace(params, batch)[-1]
    return out[0] if single else out


def backward(params: MlpParams, x, upstream_gradient) -> GradBundle:
    """Reverse-mode gradients of `sum(forward(x) * upstream_gradient)`."""
    batch, single = _as_batch(params, x)
    upstream = numpy.asarray(upstream_gradient, dtype=numpy.float64)
    if single:
        upstream = upstream.reshape(1, -1)
    if upstream.shape != (batch.shape[0], params.output_dim):
        raise ProstheticsShapeError(
            f'expect upstream gradient of shape {(batch.shape[0], params.output_dim)}, but got {upstream.shape}',
        )

    activations = _trace(params, batch)
    output = activations[-1]
    if params.output_activation is OutputActivation.UNIT_INTERVAL:
        delta = upstream * output * (1.0 - output)
    else:
        delta = upstream

    weight_grads: List[numpy.ndarray] = [numpy.empty(0)] * params.n_layers
    bias_grads: List[numpy.ndarray] = [numpy.empty(0)] * params.n_layers
    for layer in reversed(range(params.n_layers)):
        layer_input = activations[layer]
        weight_grads[layer] = delta.T @ layer_input
        bias_grads[layer] = delta.sum(axis=0)
        grad_input = delta @ params.weights[layer]
        if layer > 0:
            delta = grad_input * (1.0 - layer_input ** 2)

    input_grad = grad_input[0] if single else grad_input
    return GradBundle(tuple(weight_grads), tuple(bias_grads), input_grad, float(numpy.sum(output * upstream)))


def jvp(params: MlpParams, x, tangent: Sequence[numpy.ndarray]) -> numpy.ndarray:
    """Forward-mode directional derivative of the output along parameter direction `tangent`."""
    batch, single = _as_batch(params, x)
    tangent_weights, tangent_biases = tangent[0::2], tangent[1::2]

    act = batch
    d_act = numpy.zeros_like(batch)
    for layer in range(params.n_layers):
        weight = params.weights[layer]
        z = act @ weight.T + params.biases[layer]
        dz = act @ tangent_weights[layer].T + d_act @ weight.T + tangent_biases[layer]
        if layer < params.n_layers - 1:
            act = numpy.tanh(z)
            d_act = (1.0 - act ** 2) * dz
        elif params.output_activation is OutputActivation.UNIT_INTERVAL:
            act = sigmoid(z)
            d_act = act * (1.0 - act) * dz
        else:
            d_act = dz
    return d_act[0] if single else d_act


def _trace(params: MlpParams, batch: numpy.ndarray) -> List[numpy.ndarray]:
    activations = [batch]
    act = batch
    for layer in range(params.n_layers):
        z = act @ params.weights[layer].T + params.biases[layer]
        if layer < params.n_layers - 1:
            act = numpy.tanh(z)
        elif params.output_activation is OutputActivation.UNIT_INTERVAL:
            act = sigmoid(z)
        else:
            act = z
        activations.append(act)
    return activations


def _as_batch(params: MlpParams, x) -> Tuple[numpy.ndarray, bool]:
    arr = numpy.asarray(x, dtype=numpy.float64)
    single = arr.ndim == 1
    if single:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != params.input_dim:
        raise ProstheticsShapeError(f'expect input of width {params.input_dim}, but got shape {numpy.shape(x)}')
    return arr, single

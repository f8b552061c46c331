import numpy
import pytest

from prosthetics.exceptions import ProstheticsConfigError, ProstheticsShapeError
from prosthetics.nn.gradcheck import check_mlp_gradients, random_gradchecks
from prosthetics.nn.mlp import (
    MlpParams,
    OutputActivation,
    backward,
    flatten,
    forward,
    init_params,
    jvp,
    unflatten,
    zeros_like,
)


def _linear(weight, bias=None, activation=OutputActivation.IDENTITY) -> MlpParams:
    weight = numpy.array(weight, dtype=numpy.float64)
    bias = numpy.zeros(weight.shape[0]) if bias is None else numpy.array(bias, dtype=numpy.float64)
    return MlpParams((weight.shape[1], weight.shape[0]), (weight,), (bias,), activation)


def test_init_params_shapes():
    params = init_params((4, 8, 19))
    assert [w.shape for w in params.weights] == [(8, 4), (19, 8)]
    assert [b.shape for b in params.biases] == [(8,), (19,)]
    assert params.size() == 8 * 4 + 8 + 19 * 8 + 19


def test_init_params_determinism():
    a, b = init_params((4, 8, 19), seed=3), init_params((4, 8, 19), seed=3)
    assert all(numpy.array_equal(x, y) for x, y in zip(a.arrays(), b.arrays()))
    c = init_params((4, 8, 19), seed=4)
    assert not numpy.array_equal(a.weights[0], c.weights[0])


@pytest.mark.parametrize("dims", [(), (4,), (4, 0, 19), (-1, 3)])
def test_init_params_invalid(dims):
    with pytest.raises(ProstheticsConfigError):
        init_params(dims)


forward_testdata = [
    # (activation, expect)
    (OutputActivation.IDENTITY, 0.0),
    (OutputActivation.UNIT_INTERVAL, 0.5),
]


@pytest.mark.parametrize("activation,expect", forward_testdata)
def test_forward_zero_params(activation, expect):
    params = zeros_like(init_params((4, 8, 19), activation))
    out = forward(params, numpy.array([0.3, -1.0, 2.0, 5.0]))
    assert out.shape == (19,)
    assert numpy.all(out == expect)


def test_forward_identity_layer():
    params = _linear(numpy.eye(3))
    x = numpy.array([1.5, -2.0, 0.25])
    assert numpy.array_equal(forward(params, x), x)


@pytest.mark.parametrize("magnitude", [40.0, 60.0, 800.0, 1e6])
def test_unit_interval_output_saturates_inside_bounds(magnitude):
    params = _linear([[1.0], [-1.0]], activation=OutputActivation.UNIT_INTERVAL)
    out = forward(params, numpy.array([[magnitude], [-magnitude], [0.0]]))
    assert numpy.all((out > 0.0) & (out < 1.0))
    assert out[0, 0] > 0.5 > out[0, 1]
    assert out[2].tolist() == [0.5, 0.5]


def test_policy_width_output_inside_bounds():
    params = init_params((4, 19), OutputActivation.UNIT_INTERVAL, seed=0)
    out = forward(params, numpy.full(4, 60.0))
    assert numpy.all((out > 0.0) & (out < 1.0))


def test_forward_batch_matches_single():
    params = init_params((4, 8, 19), OutputActivation.UNIT_INTERVAL, seed=1)
    batch = numpy.random.default_rng(0).normal(size=(5, 4))
    out = forward(params, batch)
    assert out.shape == (5, 19)
    for row, x in zip(out, batch):
        assert numpy.allclose(row, forward(params, x))


def test_forward_wrong_width():
    with pytest.raises(ProstheticsShapeError):
        forward(init_params((4, 8, 19)), numpy.zeros(5))


def test_backward_product_rule():
    grads = backward(_linear([[2.0]]), numpy.array([3.0]), numpy.array([1.0]))
    assert grads.weights[0].tolist() == [[3.0]]
    assert grads.biases[0].tolist() == [1.0]
    assert grads.input_grad.tolist() == [2.0]
    assert grads.loss == pytest.approx(6.0)


def test_backward_zero_upstream():
    params = init_params((4, 8, 19), OutputActivation.UNIT_INTERVAL, seed=2)
    grads = backward(params, numpy.ones((3, 4)), numpy.zeros((3, 19)))
    assert all(not numpy.any(a) for a in grads.arrays())
    assert not numpy.any(grads.input_grad)


def test_backward_upstream_shape():
    params = init_params((4, 8, 19))
    with pytest.raises(ProstheticsShapeError):
        backward(params, numpy.ones((3, 4)), numpy.zeros((3, 18)))


@pytest.mark.parametrize("dims,activation", [
    ((4, 19), OutputActivation.IDENTITY),
    ((4, 8, 19), OutputActivation.UNIT_INTERVAL),
    ((23, 16, 16, 1), OutputActivation.IDENTITY),
    ((3, 5, 7, 2), OutputActivation.UNIT_INTERVAL),
])
def test_gradcheck(dims, activation):
    rng = numpy.random.default_rng(11)
    params = init_params(dims, activation, seed=5)
    x = rng.normal(size=(3, dims[0]))
    upstream = rng.normal(size=(3, dims[-1]))
    assert check_mlp_gradients(params, x, upstream).max_relative_error < 1e-4


def test_random_gradchecks():
    results = random_gradchecks(10, seed=0)
    assert len(results) == 10
    assert max(r.max_relative_error for r in results) < 1e-4


def test_jvp_matches_finite_difference():
    rng = numpy.random.default_rng(4)
    params = init_params((4, 8, 19), OutputActivation.UNIT_INTERVAL, seed=6)
    x = rng.normal(size=(2, 4))
    direction = rng.normal(size=params.size())
    h = 1e-6
    plus = forward(unflatten(params, flatten(params) + h * direction), x)
    minus = forward(unflatten(params, flatten(params) - h * direction), x)
    expected = (plus - minus) / (2 * h)
    tangent = unflatten(params, direction).arrays()
    assert numpy.allclose(jvp(params, x, tangent), expected, atol=1e-7)


def test_flatten_unflatten():
    params = init_params((4, 8, 19), seed=9)
    restored = unflatten(params, flatten(params))
    assert all(numpy.array_equal(a, b) for a, b in zip(params.arrays(), restored.arrays()))
    with pytest.raises(ProstheticsShapeError):
        unflatten(params, numpy.zeros(params.size() + 1))

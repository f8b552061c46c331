import math

import numpy
import pytest

from prosthetics.algorithms.gaussian import gaussian_logprob, kl_gradient, logprob_gradients, policy_kl
from prosthetics.algorithms.ppo import make_policy
from prosthetics.exceptions import ProstheticsShapeError
from prosthetics.harness.oracles import kl_per_dim

kl_testdata = [
    # (mean_old, log_std_old, mean_new, log_std_new, expect_kl)
    ([0.0], [0.0], [0.0], [0.0], 0.0),
    ([0.0], [0.0], [1.0], [0.0], 0.5),
    ([0.0] * 5, [0.0] * 5, [1.0] * 5, [0.0] * 5, 2.5),
    ([0.3], [math.log(2.0)], [-0.1], [math.log(0.5)], kl_per_dim(0.3, 2.0, -0.1, 0.5)),
    ([1.0, -1.0], [0.2, -0.3], [1.0, -1.0], [0.2, -0.3], 0.0),
]


@pytest.mark.parametrize("mean_old,log_std_old,mean_new,log_std_new,expect_kl", kl_testdata)
def test_policy_kl(mean_old, log_std_old, mean_new, log_std_new, expect_kl):
    assert policy_kl(mean_old, log_std_old, mean_new, log_std_new) == pytest.approx(expect_kl, abs=1e-12)


def test_policy_kl_is_batch_mean():
    mean_old = numpy.zeros((2, 1))
    mean_new = numpy.array([[1.0], [0.0]])
    assert policy_kl(mean_old, [0.0], mean_new, [0.0]) == pytest.approx(0.25)


@pytest.mark.parametrize("d", [1, 5, 19])
def test_logprob_at_mode(d):
    expected = -0.5 * d * math.log(2 * math.pi)
    assert gaussian_logprob(numpy.zeros(d), numpy.zeros(d), numpy.zeros(d)) == pytest.approx(expected)


def test_logprob_shape_mismatch():
    with pytest.raises(ProstheticsShapeError):
        gaussian_logprob(numpy.zeros(3), numpy.zeros(3), numpy.zeros(4))


def test_logprob_gradients_match_finite_differences():
    rng = numpy.random.default_rng(0)
    policy = make_policy((6,), -0.5, seed=1)
    obs = rng.normal(size=(4, 4))
    actions = rng.uniform(0.0, 1.0, size=(4, 19))
    weights = rng.normal(size=4)

    def objective(theta):
        candidate = policy.with_flat(theta)
        return float(numpy.sum(weights * gaussian_logprob(candidate.mean(obs), candidate.log_std, actions)))

    mean_grad, log_std_grad = logprob_gradients(policy, obs, actions, weights)
    analytic = numpy.concatenate([mean_grad, log_std_grad])
    theta = policy.flat()
    h = 1e-6
    numeric = numpy.array([
        (objective(theta + h * e) - objective(theta - h * e)) / (2 * h) for e in numpy.eye(theta.size)
    ])
    assert numpy.allclose(analytic, numeric, atol=1e-5)


def test_kl_gradient_vanishes_at_old_policy():
    rng = numpy.random.default_rng(1)
    policy = make_policy((6,), -1.0, seed=2)
    obs = rng.normal(size=(5, 4))
    grad = kl_gradient(policy, obs, policy.mean(obs), policy.log_std)
    assert numpy.allclose(grad, 0.0, atol=1e-12)

import numpy
import pytest

from prosthetics.algorithms.advantages import gae_advantages, normalize_advantages
from prosthetics.exceptions import ProstheticsShapeError
from prosthetics.harness.oracles import gae_double_sum


def test_telescoping():
    rewards = numpy.array([1.0, -2.0, 0.5, 3.0])
    values = numpy.array([0.3, 0.1, -0.4, 2.0])
    last_value = 1.5
    adv, returns = gae_advantages(rewards, values, last_value, numpy.zeros(4), gamma=1.0, lam=1.0)

    tail_sums = numpy.cumsum(rewards[::-1])[::-1] + last_value
    assert numpy.allclose(adv, tail_sums - values)
    assert numpy.allclose(returns, tail_sums)


def test_all_zero():
    adv, returns = gae_advantages(numpy.zeros(5), numpy.zeros(5), 0.0, numpy.zeros(5), 0.99, 0.95)
    assert not numpy.any(adv)
    assert not numpy.any(returns)


def test_terminal_stops_bootstrap():
    adv, _ = gae_advantages([1.0, 1.0], [0.0, 0.0], 100.0, [0.0, 1.0], gamma=1.0, lam=1.0)
    assert adv.tolist() == [2.0, 1.0]


@pytest.mark.parametrize("seed", range(5))
def test_double_sum_oracle(seed):
    rng = numpy.random.default_rng(seed)
    rewards, values = rng.normal(size=10), rng.normal(size=10)
    dones = (rng.random(10) < 0.2).astype(float)
    last_value = float(rng.normal())
    adv, _ = gae_advantages(rewards, values, last_value, dones, 0.97, 0.9)
    assert numpy.max(numpy.abs(adv - gae_double_sum(rewards, values, last_value, dones, 0.97, 0.9))) < 1e-10


def test_length_mismatch():
    with pytest.raises(ProstheticsShapeError):
        gae_advantages(numpy.zeros(3), numpy.zeros(4), 0.0, numpy.zeros(3), 0.99, 0.95)


def test_normalize():
    adv = normalize_advantages(numpy.array([1.0, 2.0, 3.0, 4.0]))
    assert numpy.mean(adv) == pytest.approx(0.0)
    assert numpy.std(adv) == pytest.approx(1.0)


def test_normalize_constant():
    constant = numpy.full(4, 2.5)
    assert numpy.array_equal(normalize_advantages(constant), constant)

import numpy
import pytest

from prosthetics.defaults import ACTION_DIM
from prosthetics.exceptions import (
    ProstheticsCompatibilityError,
    ProstheticsConfigError,
    ProstheticsNumericalError,
    ProstheticsShapeError,
    ProstheticsUsageError,
)
from prosthetics.muscles import SUPPORT_MUSCLES, MuscleMix, as_muscle_action
from prosthetics.stander import EnvConfig, StanderEnv, make_env


def _random_trace(cfg: EnvConfig, seed: int):
    env = StanderEnv(cfg)
    rng = numpy.random.default_rng(seed)
    observations = [env.reset(seed)]
    rewards = []
    while not env.done:
        result = env.step(rng.uniform(0.0, 1.0, size=ACTION_DIM))
        observations.append(result.observation)
        rewards.append(result.reward)
    return numpy.array(observations), numpy.array(rewards)


def test_reset_observation():
    env = make_env()
    obs = env.reset(0)
    assert obs.tolist() == [1.0, 0.0, 0.0, 3.0]
    assert env.steps_consumed == 0


def test_standing_observation():
    obs = StanderEnv(EnvConfig.standing()).reset(0)
    assert obs.tolist() == [1.0, 0.0, 0.0, 0.0]


def test_zero_action_step():
    env = make_env()
    env.reset(0)
    result = env.step(numpy.zeros(ACTION_DIM))

    assert result.observation[1] == pytest.approx(-9.81 * 0.01)
    assert result.observation[2] == 0.0
    assert result.reward == pytest.approx(0.0)
    assert not result.done
    assert not result.fall
    assert env.steps_consumed == 1


def test_zero_support_falls():
    env = make_env()
    env.reset(0)
    steps = 0
    result = None
    while not env.done:
        result = env.step(numpy.zeros(ACTION_DIM))
        steps += 1
    assert result.fall
    assert result.done
    assert steps < env.cfg.max_steps
    assert result.observation[0] * env.cfg.rest_height < env.cfg.fall_height


def test_full_support_runs_to_time_limit():
    env = make_env(max_steps=300)
    env.reset(0)
    action = numpy.concatenate([numpy.ones(SUPPORT_MUSCLES), numpy.full(ACTION_DIM - SUPPORT_MUSCLES, 0.5)])
    result = None
    while not env.done:
        result = env.step(action)
    assert not result.fall
    assert env.state.step_index == 300


@pytest.mark.parametrize("length", [0, 18, 20])
def test_wrong_action_length(length):
    env = make_env()
    env.reset(0)
    with pytest.raises(ProstheticsShapeError):
        env.step(numpy.zeros(length))


def test_non_finite_action():
    env = make_env()
    env.reset(0)
    action = numpy.zeros(ACTION_DIM)
    action[3] = numpy.nan
    with pytest.raises(ProstheticsNumericalError):
        env.step(action)


def test_action_is_clamped():
    assert as_muscle_action(numpy.full(ACTION_DIM, 2.0)).tolist() == [1.0] * ACTION_DIM
    assert as_muscle_action(numpy.full(ACTION_DIM, -2.0)).tolist() == [0.0] * ACTION_DIM


@pytest.mark.parametrize("overrides", [
    {'dt': 0.0},
    {'dt': -0.01},
    {'mass': 0.0},
    {'fall_fraction': 1.5},
    {'max_steps': 0},
    {'obs_noise': -1.0},
    {'spring_k': 1e9},
])
def test_invalid_config(overrides):
    with pytest.raises(ProstheticsConfigError):
        EnvConfig(**overrides)


def test_step_after_done():
    env = make_env(max_steps=1)
    env.reset(0)
    assert env.step(numpy.ones(ACTION_DIM)).done
    with pytest.raises(ProstheticsUsageError):
        env.step(numpy.ones(ACTION_DIM))


@pytest.mark.parametrize("obs_noise", [0.0, 0.01])
def test_determinism(obs_noise):
    cfg = EnvConfig(obs_noise=obs_noise, max_steps=200)
    obs_a, rewards_a = _random_trace(cfg, 7)
    obs_b, rewards_b = _random_trace(cfg, 7)
    assert numpy.array_equal(obs_a, obs_b)
    assert numpy.array_equal(rewards_a, rewards_b)


def test_noise_depends_on_episode_seed():
    cfg = EnvConfig(obs_noise=0.01, max_steps=50)
    obs_a, _ = _random_trace(cfg, 1)
    obs_b, _ = _random_trace(cfg, 2)
    assert not numpy.array_equal(obs_a, obs_b)


@pytest.mark.parametrize("obs_noise", [0.0, 0.05])
def test_snapshot_restore(obs_noise):
    env = make_env(obs_noise=obs_noise)
    rng = numpy.random.default_rng(3)
    env.reset(3)
    for _ in range(10):
        env.step(rng.uniform(0.0, 1.0, size=ACTION_DIM))
    snap = env.snapshot()
    actions = rng.uniform(0.0, 1.0, size=(20, ACTION_DIM))

    first = [env.step(a) for a in actions]
    env.restore(snap)
    second = [env.step(a) for a in actions]

    for a, b in zip(first, second):
        assert numpy.array_equal(a.observation, b.observation)
        assert a.reward == b.reward
        assert a.done == b.done


def test_restore_into_other_env():
    env = make_env(mix_seed=0)
    env.reset(0)
    snap = env.snapshot()
    other = make_env(mix_seed=1)
    other.reset(0)
    with pytest.raises(ProstheticsCompatibilityError):
        other.restore(snap)


def test_fingerprint():
    assert EnvConfig().fingerprint() == EnvConfig().fingerprint()
    assert EnvConfig().fingerprint() != EnvConfig(mix_seed=1).fingerprint()
    assert EnvConfig.walking().fingerprint() != EnvConfig.standing().fingerprint()


def test_muscle_mix_from_seed():
    assert MuscleMix.from_seed(5) == MuscleMix.from_seed(5)
    assert MuscleMix.from_seed(5) != MuscleMix.from_seed(6)
    assert all(-1.0 <= w <= 1.0 for w in MuscleMix.from_seed(5).drive_weights)

import numpy
import pytest

from prosthetics.defaults import ACTION_DIM
from prosthetics.exceptions import ProstheticsCompatibilityError, ProstheticsConfigError
from prosthetics.harness.oracles import gate_oracle, resimulated_return, resimulated_reward
from prosthetics.imitation.labeling import (
    branch_return,
    label_return_gated,
    label_reward_gated,
    label_vanilla,
    select_action_epsilon,
)
from prosthetics.imitation.policy import MlpPolicy
from prosthetics.muscles import SUPPORT_MUSCLES
from prosthetics.nn.mlp import zeros_like
from prosthetics.oracle import OraclePolicy
from prosthetics.stander import EnvConfig, StanderEnv, make_env


def _midway(cfg: EnvConfig, seed: int, steps: int):
    """Env after `steps` random actions, plus the action history that led there."""
    env = StanderEnv(cfg)
    rng = numpy.random.default_rng(seed)
    env.reset(seed)
    history = []
    for _ in range(steps):
        action = rng.uniform(0.0, 1.0, size=ACTION_DIM)
        env.step(action)
        history.append(action)
    return env, history, rng


def _drive(level: float) -> numpy.ndarray:
    return numpy.concatenate([numpy.ones(SUPPORT_MUSCLES), numpy.full(ACTION_DIM - SUPPORT_MUSCLES, level)])


def test_vanilla_zero_expert():
    expert = MlpPolicy(zeros_like(MlpPolicy.fresh(0).params))
    obs = numpy.array([1.0, 0.0, 0.0, 3.0])
    label = label_vanilla(expert, obs)
    assert numpy.all(label == 0.5)
    assert numpy.array_equal(label, label_vanilla(expert, obs))


def test_reward_gate_tie_goes_to_expert():
    env, _, _ = _midway(EnvConfig(), 0, 5)
    action = _drive(0.5)
    decision = label_reward_gated(env, env.snapshot(), action, action.copy())
    assert decision.expert_won
    assert decision.label is action


def test_reward_gate_prefers_better_target():
    env = make_env()
    env.reset(0)
    mix = env.mix.weights
    forward_drive = numpy.concatenate([numpy.ones(SUPPORT_MUSCLES), (mix > 0).astype(float)])
    idle = _drive(0.0)
    decision = label_reward_gated(env, env.snapshot(), idle, forward_drive)
    assert not decision.expert_won
    assert decision.label is forward_drive


@pytest.mark.parametrize("seed", range(100))
def test_reward_gate_matches_resimulation(seed):
    cfg = EnvConfig(obs_noise=0.01)
    env, history, rng = _midway(cfg, seed, seed % 25 + 1)
    a_expert, a_target = rng.uniform(0.0, 1.0, size=ACTION_DIM), rng.uniform(0.0, 1.0, size=ACTION_DIM)
    decision = label_reward_gated(env, env.snapshot(), a_expert, a_target)
    expected = gate_oracle(resimulated_reward(cfg, seed, history, a_expert), resimulated_reward(cfg, seed, history, a_target))
    assert decision.expert_won == expected


@pytest.mark.parametrize("horizon", [1, 5, None])
def test_branch_return_matches_resimulation(horizon):
    cfg = EnvConfig(max_steps=60, obs_noise=0.01)
    env, history, rng = _midway(cfg, 3, 10)
    policy = OraclePolicy(env.mix)
    first = rng.uniform(0.0, 1.0, size=ACTION_DIM)
    value = branch_return(env, env.snapshot(), first, policy, horizon)
    assert value == pytest.approx(resimulated_return(cfg, 3, history, first, policy, horizon), rel=0, abs=1e-10)


def test_gates_restore_env():
    cfg = EnvConfig(obs_noise=0.01)
    env, _, rng = _midway(cfg, 1, 12)
    before = env.state
    policy = OraclePolicy(env.mix)
    a_expert, a_target = rng.uniform(0.0, 1.0, size=ACTION_DIM), rng.uniform(0.0, 1.0, size=ACTION_DIM)
    label_reward_gated(env, env.snapshot(), a_expert, a_target)
    label_return_gated(env, env.snapshot(), a_expert, a_target, policy, policy, horizon=20)
    assert env.state == before


def test_one_step_return_gate_equals_reward_gate():
    cfg = EnvConfig()
    env = StanderEnv(cfg)
    policy = OraclePolicy(env.mix)
    rng = numpy.random.default_rng(0)
    env.reset(0)
    for _ in range(100):
        if env.step(rng.uniform(0.0, 1.0, size=ACTION_DIM)).done:
            env.reset(int(rng.integers(2 ** 31)))
        snap = env.snapshot()
        a_expert, a_target = rng.uniform(0.0, 1.0, size=ACTION_DIM), rng.uniform(0.0, 1.0, size=ACTION_DIM)
        by_reward = label_reward_gated(env, snap, a_expert, a_target)
        by_return = label_return_gated(env, snap, a_expert, a_target, policy, policy, horizon=1)
        assert by_reward.expert_won == by_return.expert_won


def test_return_gate_tie_with_same_policies():
    env, _, _ = _midway(EnvConfig(max_steps=80), 2, 5)
    policy = OraclePolicy(env.mix)
    action = _drive(0.3)
    decision = label_return_gated(env, env.snapshot(), action, action.copy(), policy, policy)
    assert decision.expert_won


def test_return_gate_invalid_horizon():
    env, _, _ = _midway(EnvConfig(), 0, 1)
    policy = OraclePolicy(env.mix)
    with pytest.raises(ProstheticsConfigError):
        label_return_gated(env, env.snapshot(), _drive(0.5), _drive(0.5), policy, policy, horizon=0)


def test_gate_rejects_foreign_snapshot():
    env, _, _ = _midway(EnvConfig(), 0, 1)
    other = make_env(mix_seed=9)
    other.reset(0)
    with pytest.raises(ProstheticsCompatibilityError):
        label_reward_gated(other, env.snapshot(), _drive(0.5), _drive(0.5))


epsilon_testdata = [
    # (epsilon, expect_fraction)
    (0.0, 0.0),
    (1.0, 1.0),
]


@pytest.mark.parametrize("epsilon,expect_fraction", epsilon_testdata)
def test_epsilon_extremes(epsilon, expect_fraction):
    rng = numpy.random.default_rng(0)
    a_expert, a_target = _drive(1.0), _drive(0.0)
    picks = [select_action_epsilon(a_expert, a_target, epsilon, rng) for _ in range(200)]
    assert numpy.mean([took for _, took in picks]) == expect_fraction
    expected_action = a_expert if expect_fraction else a_target
    assert all(action is expected_action for action, _ in picks)


@pytest.mark.parametrize("epsilon", [0.1, 0.25, 0.5])
def test_epsilon_frequency(epsilon):
    rng = numpy.random.default_rng(42)
    a_expert, a_target = _drive(1.0), _drive(0.0)
    draws = 100_000
    took = [select_action_epsilon(a_expert, a_target, epsilon, rng)[1] for _ in range(draws)]
    assert abs(numpy.mean(took) - epsilon) <= 3 * numpy.sqrt(epsilon * (1 - epsilon) / draws)


@pytest.mark.parametrize("epsilon", [-0.1, 1.5])
def test_epsilon_out_of_range(epsilon):
    with pytest.raises(ProstheticsConfigError):
        select_action_epsilon(_drive(1.0), _drive(0.0), epsilon, numpy.random.default_rng(0))

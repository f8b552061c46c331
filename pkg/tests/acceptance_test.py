"""Long end-to-end runs on the default walking task, deselected unless `-m slow`."""

import dataclasses

import numpy
import pandas  # type: ignore
import pytest

from prosthetics.algorithms.checkpoint import AlgorithmId, policy_from_checkpoint
from prosthetics.algorithms.ddpg import DdpgConfig
from prosthetics.algorithms.training import Budget, train
from prosthetics.algorithms.trpo import TrpoConfig
from prosthetics.harness.config import config_from_dict
from prosthetics.harness.suite import run_dagger_suite
from prosthetics.imitation.dagger import DaggerConfig, DaggerVariant, run_dagger
from prosthetics.imitation.evaluation import evaluate
from prosthetics.imitation.policy import MlpPolicy
from prosthetics.oracle import OraclePolicy
from prosthetics.stander import EnvConfig, StanderEnv

pytestmark = pytest.mark.slow

EVAL_EPISODES = 20


@pytest.fixture(scope='module')
def oracle_return():
    env = StanderEnv(EnvConfig())
    return evaluate(OraclePolicy(env.mix), env, EVAL_EPISODES, seed=0).mean_return


@pytest.fixture(scope='module')
def ddpg_expert():
    ckpt, _ = train(AlgorithmId.DDPG, StanderEnv(EnvConfig()), Budget(300, 1000), seed=0, hyperparams=DdpgConfig())
    return ckpt


def test_trpo_trust_region():
    cfg = TrpoConfig()
    _, report = train(AlgorithmId.TRPO, StanderEnv(EnvConfig()), Budget(50 * cfg.episodes_per_batch, 1000), 0, cfg)
    assert len(report.updates) >= 50
    assert all(u.kl <= cfg.kl_delta for u in report.updates if u.accepted)
    assert report.acceptance_rate >= 0.95


def test_ddpg_expert_attainment(ddpg_expert, oracle_return):
    expert = MlpPolicy(policy_from_checkpoint(ddpg_expert))
    result = evaluate(expert, StanderEnv(EnvConfig()), EVAL_EPISODES, seed=1)
    assert result.mean_return >= 0.7 * oracle_return


def test_vanilla_dagger_convergence(ddpg_expert):
    reports = run_dagger(StanderEnv(EnvConfig()), ddpg_expert, DaggerConfig(variant=DaggerVariant.VANILLA), seed=0)
    assert reports[-1].converged
    assert len(reports) <= 5
    assert reports[-1].env_steps <= 0.1 * ddpg_expert.env_steps


variants_testdata = [
    # (variant, rollout_horizon)
    (DaggerVariant.VANILLA, None),
    (DaggerVariant.REWARD_GATED, None),
    (DaggerVariant.RETURN_GATED, None),
    (DaggerVariant.RETURN_GATED, 50),
    (DaggerVariant.EPSILON_GREEDY, None),
]


@pytest.mark.parametrize("variant,rollout_horizon", variants_testdata)
def test_variants_converge(ddpg_expert, variant, rollout_horizon):
    cfg = dataclasses.replace(DaggerConfig(), variant=variant, rollout_horizon=rollout_horizon)
    converged = [run_dagger(StanderEnv(EnvConfig()), ddpg_expert, cfg, seed)[-1].converged for seed in range(5)]
    assert sum(converged) >= 4


def test_vanilla_learner_mean_trend(ddpg_expert, tmp_path):
    cfg = config_from_dict({'dagger': {'convergence_fraction': 1.0}, 'seeds': [0, 1, 2, 3, 4]})
    path = run_dagger_suite(cfg, ddpg_expert, str(tmp_path), (DaggerVariant.VANILLA,))

    frame = pandas.read_csv(path)
    assert len(frame) >= len(cfg.seeds)
    steps = [
        numpy.diff(rows.sort_values('iteration')['learner_mean'].to_numpy()) >= 0
        for _, rows in frame.groupby('seed')
    ]
    pairs = numpy.concatenate(steps)
    if pairs.size:
        assert numpy.mean(pairs) >= 0.8

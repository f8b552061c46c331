import os

import pytest

from prosthetics.algorithms.checkpoint import AlgorithmId
from prosthetics.algorithms.ddpg import DdpgConfig
from prosthetics.exceptions import ProstheticsConfigError
from prosthetics.harness.config import ExperimentConfig, config_from_dict, load_config
from prosthetics.imitation.dagger import DaggerVariant


def test_defaults():
    cfg = config_from_dict({})
    assert cfg == ExperimentConfig()
    assert cfg.seeds == (0,)
    assert cfg.budget.episodes == 2000
    assert cfg.budget.steps_per_episode == 1000
    assert cfg.env.target_velocity == 3.0


def test_sections():
    cfg = config_from_dict({
        'env': {'max_steps': 200, 'obs_noise': 0.01},
        'ddpg': {'hidden_dims': [32, 32], 'tau': 0.01},
        'dagger': {'variant': 'ReturnGated', 'rollout_horizon': 50},
        'seeds': [1, 2, 3],
        'output_dir': 'out',
    })
    assert cfg.env.max_steps == 200
    assert cfg.ddpg == DdpgConfig(hidden_dims=(32, 32), tau=0.01)
    assert cfg.dagger.variant is DaggerVariant.RETURN_GATED
    assert cfg.dagger.rollout_horizon == 50
    assert cfg.seeds == (1, 2, 3)
    assert cfg.output_dir == 'out'
    assert cfg.hyperparams(AlgorithmId.DDPG) is cfg.ddpg


@pytest.mark.parametrize("raw,expect_message", [
    ({'ddpg': {'taus': 0.1}}, 'unknown config key "ddpg.taus"'),
    ({'optimizer': {}}, 'unknown config key "optimizer"'),
    ({'env': 3}, 'section "env" must be a mapping'),
    ({'seeds': 'all'}, 'seeds must be a list of integers'),
])
def test_invalid_keys(raw, expect_message):
    with pytest.raises(ProstheticsConfigError) as exc:
        config_from_dict(raw)
    assert expect_message in str(exc.value)


@pytest.mark.parametrize("raw", [
    {'seeds': []},
    {'env': {'dt': 0.0}},
    {'dagger': {'variant': 'Gated'}},
    {'budget': {'episodes': -5}},
    {'trpo': {'kl_delta': -1.0}},
    [1, 2],
])
def test_invalid_values(raw):
    with pytest.raises(ProstheticsConfigError):
        config_from_dict(raw)


def test_with_task():
    cfg = config_from_dict({'env': {'max_steps': 100}})
    standing = cfg.with_task('standing')
    assert standing.env.target_velocity == 0.0
    assert standing.env.max_steps == 100
    assert standing.with_task('walking').env == cfg.env
    assert cfg.with_task(None) is cfg
    with pytest.raises(ProstheticsConfigError):
        cfg.with_task('running')


def test_load_config(tmp_path):
    path = tmp_path / 'experiment.yaml'
    path.write_text('budget:\n  episodes: 3\nseeds: [4]\n')
    cfg = load_config(str(path))
    assert cfg.budget.episodes == 3
    assert cfg.seeds == (4,)


def test_load_empty_config(tmp_path):
    path = tmp_path / 'empty.yaml'
    path.write_text('')
    assert load_config(str(path)) == ExperimentConfig()


def test_load_broken_yaml(tmp_path):
    path = tmp_path / 'broken.yaml'
    path.write_text('budget: [episodes: 3\n')
    with pytest.raises(ProstheticsConfigError):
        load_config(str(path))


def test_load_missing(tmp_path):
    with pytest.raises(ProstheticsConfigError):
        load_config(str(tmp_path / 'missing.yaml'))


@pytest.mark.parametrize("name", ['default.yaml', 'quick.yaml'])
def test_shipped_configs(name):
    cfg = load_config(os.path.join(os.path.dirname(__file__), '..', '..', 'configs', name))
    assert cfg.seeds

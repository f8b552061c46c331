"""
Конфигурация эксперимента из YAML-файла.

Каждая секция (env, ddpg, ppo, trpo, dagger, budget) отображается в dataclass,
пропущенные ключи берут значения по умолчанию, неизвестные ключи - ошибка.

"""

import dataclasses
import logging
from typing import Any, Dict, Optional, Tuple

import yaml

from prosthetics.algorithms.checkpoint import AlgorithmId
from prosthetics.algorithms.ddpg import DdpgConfig
from prosthetics.algorithms.ppo import PpoConfig
from prosthetics.algorithms.training import Budget, Hyperparams
from prosthetics.algorithms.trpo import TrpoConfig
from prosthetics.defaults import OUTPUT_DIR
from prosthetics.exceptions import ProstheticsConfigError
from prosthetics.imitation.dagger import DaggerConfig, DaggerVariant
from prosthetics.stander import EnvConfig

logger = logging.getLogger(__name__)

TASKS = ('walking', 'standing')

_SECTIONS = {
    'env': EnvConfig,
    'ddpg': DdpgConfig,
    'ppo': PpoConfig,
    'trpo': TrpoConfig,
    'dagger': DaggerConfig,
    'budget': Budget,
}


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    env: EnvConfig = dataclasses.field(default_factory=EnvConfig)
    ddpg: DdpgConfig = dataclasses.field(default_factory=DdpgConfig)
    ppo: PpoConfig = dataclasses.field(default_factory=PpoConfig)
    trpo: TrpoConfig = dataclasses.field(default_factory=TrpoConfig)
    dagger: DaggerConfig = dataclasses.field(default_factory=DaggerConfig)
    budget: Budget = dataclasses.field(default_factory=Budget)
    seeds: Tuple[int, ...] = (0,)
    output_dir: str = OUTPUT_DIR

    def __post_init__(self):
        if not self.seeds:
            raise ProstheticsConfigError('seeds: at least one seed is required')

    def hyperparams(self, algorithm_id: AlgorithmId) -> Hyperparams:
        return getattr(self, algorithm_id.value)

    def with_task(self, task: Optional[str]) -> 'ExperimentConfig':
        if task is None:
            return self
        if task not in TASKS:
            raise ProstheticsConfigError(f'unknown task "{task}", expect one of {", ".join(TASKS)}')
        env_overrides = {f.name: getattr(self.env, f.name) for f in dataclasses.fields(self.env)}
        env_overrides.pop('target_velocity')
        env = EnvConfig.standing(**env_overrides) if task == 'standing' else EnvConfig.walking(**env_overrides)
        return dataclasses.replace(self, env=env)


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding='utf-8') as fh:
            raw = yaml.safe_load(fh)
    except OSError as e:
        raise ProstheticsConfigError(f'can not read config {path}: {e}')
    except yaml.YAMLError as e:
        raise ProstheticsConfigError(f'config {path} is not valid YAML: {e}')

    cfg = config_from_dict(raw or {})
    logger.info(f'config {path}: seeds {list(cfg.seeds)}, budget {cfg.budget}, output to {cfg.output_dir}')
    return cfg


def config_from_dict(raw: Dict[str, Any]) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ProstheticsConfigError(f'config must be a mapping of sections, but got {type(raw).__name__}')

    errors = []
    kwargs: Dict[str, Any] = {}
    for key, value in raw.items():
        if key in _SECTIONS:
            if value is None:
                continue
            if not isinstance(value, dict):
                errors.append(f'section "{key}" must be a mapping')
                continue
            errors.extend(f'unknown config key "{key}.{name}"' for name in _unknown_keys(_SECTIONS[key], value))
            kwargs[key] = value
        elif key == 'seeds':
            if not isinstance(value, list) or not all(isinstance(s, int) for s in value):
                errors.append('seeds must be a list of integers')
            kwargs['seeds'] = tuple(value or ())
        elif key == 'output_dir':
            kwargs['output_dir'] = str(value)
        else:
            errors.append(f'unknown config key "{key}"')
    if errors:
        raise ProstheticsConfigError(errors=errors)

    for section in _SECTIONS.keys() & kwargs.keys():
        kwargs[section] = _build_section(section, kwargs[section])
    return ExperimentConfig(**kwargs)


def _unknown_keys(section_type, values: Dict[str, Any]):
    known = {f.name for f in dataclasses.fields(section_type)}
    return sorted(name for name in values if name not in known)


def _build_section(section: str, values: Dict[str, Any]):
    values = dict(values)
    if 'hidden_dims' in values:
        values['hidden_dims'] = tuple(values['hidden_dims'])
    if section == 'dagger' and 'variant' in values:
        values['variant'] = DaggerVariant.from_name(str(values['variant']))
    try:
        return _SECTIONS[section](**values)
    except TypeError as e:
        raise ProstheticsConfigError(f'section "{section}" has a value of the wrong type: {e}')

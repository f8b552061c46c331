"""
Детерминированная модель ProstheticsEnv.

Таз - точечная масса на пружине ноги, которую включают опорные мышцы; горизонтально
его толкает смесь остальных возбуждений. Награда - формула ProstheticsEnv по
горизонтальной скорости таза. Состояние можно сохранить и восстановить побитово,
на этом построены контрфактические метки DAgger.

"""

import copy
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, replace
from typing import Any, Dict, NamedTuple, Optional

import numpy

from prosthetics.calculators import reward_fn
from prosthetics.defaults import DEFAULT_TARGET_VELOCITY, OBSERVATION_DIM
from prosthetics.exceptions import ProstheticsCompatibilityError, ProstheticsConfigError, ProstheticsUsageError
from prosthetics.muscles import DRIVE_MUSCLES, MuscleAction, MuscleMix, as_muscle_action, drive_excitations, support_level

logger = logging.getLogger(__name__)

Observation = numpy.ndarray


@dataclass(frozen=True)
class EnvConfig:
    target_velocity: float = DEFAULT_TARGET_VELOCITY
    dt: float = 0.01
    mass: float = 75.0
    gravity: float = 9.81
    rest_height: float = 0.91
    spring_k: float = 2.0e4
    spring_c: float = 500.0
    drive_scale: float = 2000.0
    drag_c: float = 200.0
    fall_fraction: float = 0.6
    max_steps: int = 1000
    mix_seed: int = 0
    obs_noise: float = 0.0

    def __post_init__(self):
        errors = []
        if not self.dt > 0:
            errors.append(f'dt must be > 0 (got {self.dt})')
        if not self.mass > 0:
            errors.append(f'mass must be > 0 (got {self.mass})')
        if self.dt > 0 and self.mass > 0 and not self.spring_k * self.dt ** 2 / self.mass < 1:
            errors.append(f'spring_k*dt^2/mass must be < 1 (got {self.spring_k * self.dt ** 2 / self.mass})')
        if not 0 < self.fall_fraction < 1:
            errors.append(f'fall_fraction must be in (0, 1) (got {self.fall_fraction})')
        if self.max_steps < 1:
            errors.append(f'max_steps must be >= 1 (got {self.max_steps})')
        if self.obs_noise < 0:
            errors.append(f'obs_noise must be >= 0 (got {self.obs_noise})')
        if errors:
            raise ProstheticsConfigError(errors=errors)

    @classmethod
    def walking(cls, **overrides) -> 'EnvConfig':
        return cls(**overrides)

    @classmethod
    def standing(cls, **overrides) -> 'EnvConfig':
        overrides.setdefault('target_velocity', 0.0)
        return cls(**overrides)

    @property
    def fall_height(self) -> float:
        return self.fall_fraction * self.rest_height

    def fingerprint(self) -> str:
        canonical = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


@dataclass(frozen=True)
class EnvState:
    pelvis_y: float
    vel_x: float
    vel_y: float
    step_index: int
    done: bool
    fell: bool
    rng_state: Dict[str, Any]


@dataclass(frozen=True)
class EnvSnapshot:
    state: EnvState
    fingerprint: str


class StepResult(NamedTuple):
    observation: Observation
    reward: float
    done: bool
    fall: bool


class StanderEnv:
    def __init__(self, cfg: EnvConfig):
        self.cfg = cfg
        self.mix = MuscleMix.from_seed(cfg.mix_seed)
        self.steps_consumed = 0
        self._weights = self.mix.weights
        self._fingerprint = cfg.fingerprint()
        self._rng = numpy.random.default_rng(cfg.mix_seed)
        self._rest()

    @property
    def state(self) -> EnvState:
        return EnvState(
            pelvis_y=self._pelvis_y, vel_x=self._vel_x, vel_y=self._vel_y,
            step_index=self._step_index, done=self._done, fell=self._fell,
            rng_state=copy.deepcopy(self._rng.bit_generator.state),
        )

    @property
    def done(self) -> bool:
        return self._done

    def reset(self, episode_seed: int) -> Observation:
        self._rng = numpy.random.default_rng(episode_seed)
        self._rest()
        return self._observe()

    def step(self, action) -> StepResult:
        if self._done:
            raise ProstheticsUsageError(f'episode finished at step {self._step_index}, call reset() first')
        excitations = as_muscle_action(action)
        cfg = self.cfg

        support = support_level(excitations)
        drive = float(numpy.dot(self._weights, drive_excitations(excitations))) / DRIVE_MUSCLES
        force_y = support * (cfg.spring_k * (cfg.rest_height - self._pelvis_y) - cfg.spring_c * self._vel_y) - cfg.mass * cfg.gravity
        force_x = cfg.drive_scale * drive - cfg.drag_c * self._vel_x

        # semi-implicit Euler: velocities first, then position from the new velocity
        self._vel_y += cfg.dt * force_y / cfg.mass
        self._vel_x += cfg.dt * force_x / cfg.mass
        self._pelvis_y += cfg.dt * self._vel_y
        self._step_index += 1
        self.steps_consumed += 1

        self._fell = self._pelvis_y < cfg.fall_height
        self._done = self._fell or self._step_index >= cfg.max_steps
        reward = reward_fn(self._vel_x, cfg.target_velocity)
        return StepResult(self._observe(), reward, self._done, self._fell)

    def snapshot(self) -> EnvSnapshot:
        return EnvSnapshot(state=self.state, fingerprint=self._fingerprint)

    def restore(self, snap: EnvSnapshot):
        if snap.fingerprint != self._fingerprint:
            raise ProstheticsCompatibilityError(
                f'snapshot taken from env {snap.fingerprint[:12]}, can not restore into env {self._fingerprint[:12]}',
            )
        state = snap.state
        self._pelvis_y = state.pelvis_y
        self._vel_x = state.vel_x
        self._vel_y = state.vel_y
        self._step_index = state.step_index
        self._done = state.done
        self._fell = state.fell
        self._rng.bit_generator.state = copy.deepcopy(state.rng_state)

    def observation(self) -> Observation:
        """Noise-free view of the current state."""
        cfg = self.cfg
        return numpy.array([
            self._pelvis_y / cfg.rest_height,
            self._vel_y,
            self._vel_x,
            cfg.target_velocity - self._vel_x,
        ], dtype=numpy.float64)

    def _observe(self) -> Observation:
        obs = self.observation()
        if self.cfg.obs_noise > 0:
            obs = obs + self._rng.normal(0.0, self.cfg.obs_noise, size=OBSERVATION_DIM)
        return obs

    def _rest(self):
        self._pelvis_y = self.cfg.rest_height
        self._vel_x = 0.0
        self._vel_y = 0.0
        self._step_index = 0
        self._done = False
        self._fell = False

    def __str__(self):
        return f'StanderEnv(v*={self.cfg.target_velocity}, mix_seed={self.cfg.mix_seed}, step={self._step_index})'


def make_env(cfg: Optional[EnvConfig] = None, **overrides) -> StanderEnv:
    if cfg is None:
        cfg = EnvConfig(**overrides)
    elif overrides:
        cfg = replace(cfg, **overrides)
    logger.debug(f'make env {cfg}')
    return StanderEnv(cfg)


def reset(env: StanderEnv, episode_seed: int) -> Observation:
    return env.reset(episode_seed)


def step(env: StanderEnv, action: MuscleAction) -> StepResult:
    return env.step(action)


def snapshot(env: StanderEnv) -> EnvSnapshot:
    return env.snapshot()


def restore(env: StanderEnv, snap: EnvSnapshot):
    env.restore(snap)

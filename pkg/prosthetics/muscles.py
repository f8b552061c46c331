"""
Мышечные возбуждения ProstheticsEnv.

Первые 10 возбуждений держат таз (опорная пружина ноги), остальные 9 смешиваются
весами MuscleMix в горизонтальную силу.

"""

from dataclasses import dataclass
from typing import Tuple

import numpy

from prosthetics.defaults import ACTION_DIM
from prosthetics.exceptions import ProstheticsNumericalError, ProstheticsShapeError

SUPPORT_MUSCLES = 10
DRIVE_MUSCLES = ACTION_DIM - SUPPORT_MUSCLES

MuscleAction = numpy.ndarray


@dataclass(frozen=True)
class MuscleMix:
    drive_weights: Tuple[float, ...]

    @classmethod
    def from_seed(cls, mix_seed: int) -> 'MuscleMix':
        rng = numpy.random.default_rng(mix_seed)
        return cls(tuple(float(w) for w in rng.uniform(-1.0, 1.0, size=DRIVE_MUSCLES)))

    @property
    def weights(self) -> numpy.ndarray:
        return numpy.asarray(self.drive_weights, dtype=numpy.float64)


def as_muscle_action(action) -> MuscleAction:
    """Clamp policy output onto the excitation bounds [0, 1]."""
    excitations = numpy.asarray(action, dtype=numpy.float64).reshape(-1)
    if excitations.shape[0] != ACTION_DIM:
        raise ProstheticsShapeError(f'expect {ACTION_DIM} muscle excitations, but got {excitations.shape[0]}')
    if not numpy.all(numpy.isfinite(excitations)):
        raise ProstheticsNumericalError(f'non-finite muscle excitations {excitations}')
    return numpy.clip(excitations, 0.0, 1.0)


def support_level(action: MuscleAction) -> float:
    return float(numpy.mean(action[:SUPPORT_MUSCLES]))


def drive_excitations(action: MuscleAction) -> numpy.ndarray:
    return action[SUPPORT_MUSCLES:]

from typing import List, Tuple

import numpy

from prosthetics.defaults import ACTION_DIM, OBSERVATION_DIM
from prosthetics.exceptions import ProstheticsShapeError


class AggregatedDataset:
    """Append-only store of (observation, label) pairs with per-iteration boundaries."""

    def __init__(self):
        self._obs: List[numpy.ndarray] = []
        self._labels: List[numpy.ndarray] = []
        self.boundaries: List[int] = []

    def __len__(self):
        return len(self._obs)

    def append(self, obs: numpy.ndarray, label: numpy.ndarray):
        if obs.shape != (OBSERVATION_DIM,) or label.shape != (ACTION_DIM,):
            raise ProstheticsShapeError(f'dataset expects ({OBSERVATION_DIM},) -> ({ACTION_DIM},), but got {obs.shape} -> {label.shape}')
        self._obs.append(numpy.array(obs, dtype=numpy.float64))
        self._labels.append(numpy.array(label, dtype=numpy.float64))

    def close_iteration(self):
        self.boundaries.append(len(self))

    @property
    def iterations(self) -> int:
        return len(self.boundaries)

    def arrays(self) -> Tuple[numpy.ndarray, numpy.ndarray]:
        if not self._obs:
            return numpy.empty((0, OBSERVATION_DIM)), numpy.empty((0, ACTION_DIM))
        return numpy.array(self._obs), numpy.array(self._labels)

    def __str__(self):
        return f'AggregatedDataset(size={len(self)}, iterations={self.iterations})'

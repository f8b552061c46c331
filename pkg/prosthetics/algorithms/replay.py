from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Sequence, Union

import numpy

from prosthetics.defaults import ACTION_DIM, OBSERVATION_DIM
from prosthetics.exceptions import ProstheticsInsufficientData


class Transition(NamedTuple):
    obs: numpy.ndarray
    action: numpy.ndarray
    reward: float
    next_obs: numpy.ndarray
    # episode terminated (fall); time-limit ends keep bootstrapping
    done: bool

    def __str__(self):
        return f'Transition(reward={self.reward:.3f}, done={self.done})'


@dataclass(frozen=True, eq=False)
class TransitionBatch:
    obs: numpy.ndarray
    actions: numpy.ndarray
    rewards: numpy.ndarray
    next_obs: numpy.ndarray
    dones: numpy.ndarray

    def __len__(self):
        return self.rewards.shape[0]

    def __getitem__(self, i: int) -> Transition:
        return Transition(self.obs[i], self.actions[i], float(self.rewards[i]), self.next_obs[i], bool(self.dones[i]))

    @classmethod
    def stack(cls, transitions: Sequence[Transition]) -> 'TransitionBatch':
        return cls(
            obs=numpy.array([t.obs for t in transitions], dtype=numpy.float64),
            actions=numpy.array([t.action for t in transitions], dtype=numpy.float64),
            rewards=numpy.array([t.reward for t in transitions], dtype=numpy.float64),
            next_obs=numpy.array([t.next_obs for t in transitions], dtype=numpy.float64),
            dones=numpy.array([t.done for t in transitions], dtype=numpy.float64),
        )


def as_batch(batch: Union[TransitionBatch, Iterable[Transition]]) -> TransitionBatch:
    if isinstance(batch, TransitionBatch):
        return batch
    return TransitionBatch.stack(list(batch))


class ReplayBuffer:
    """Fixed-capacity ring of transitions; when full the oldest one is overwritten first."""

    def __init__(self, capacity: int, obs_dim: int = OBSERVATION_DIM, action_dim: int = ACTION_DIM):
        assert capacity > 0
        self.capacity = capacity
        self.write_index = 0
        self.size = 0
        self._obs = numpy.zeros((capacity, obs_dim))
        self._actions = numpy.zeros((capacity, action_dim))
        self._rewards = numpy.zeros(capacity)
        self._next_obs = numpy.zeros((capacity, obs_dim))
        self._dones = numpy.zeros(capacity)

    def __len__(self):
        return self.size

    def push(self, t: Transition):
        i = self.write_index
        self._obs[i] = t.obs
        self._actions[i] = t.action
        self._rewards[i] = t.reward
        self._next_obs[i] = t.next_obs
        self._dones[i] = float(t.done)
        self.write_index = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, n: int, rng: numpy.random.Generator) -> TransitionBatch:
        if self.size < n:
            raise ProstheticsInsufficientData(f'replay buffer holds {self.size} transitions, {n} requested')
        idx = rng.integers(0, self.size, size=n)
        return self._take(idx)

    def transitions(self) -> List[Transition]:
        """Stored transitions, oldest first."""
        start = self.write_index if self.size == self.capacity else 0
        idx = (start + numpy.arange(self.size)) % self.capacity
        batch = self._take(idx)
        return [batch[i] for i in range(len(batch))]

    def _take(self, idx: numpy.ndarray) -> TransitionBatch:
        return TransitionBatch(
            obs=self._obs[idx], actions=self._actions[idx], rewards=self._rewards[idx],
            next_obs=self._next_obs[idx], dones=self._dones[idx],
        )

    def __str__(self):
        return f'ReplayBuffer({self.size}/{self.capacity})'


def buffer_push(buf: ReplayBuffer, t: Transition):
    buf.push(t)


def buffer_sample(buf: ReplayBuffer, n: int, rng: numpy.random.Generator) -> TransitionBatch:
    return buf.sample(n, rng)

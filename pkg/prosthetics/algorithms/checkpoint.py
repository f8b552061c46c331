from dataclasses import dataclass, field
from enum import Enum, unique
from typing import Dict, Union

import numpy

from prosthetics.algorithms.ddpg import DdpgAgent
from prosthetics.algorithms.ppo import PpoAgent
from prosthetics.algorithms.trpo import TrpoAgent
from prosthetics.exceptions import MalformedCheckpointError
from prosthetics.nn.adam import AdamState
from prosthetics.nn.mlp import MlpParams

Agent = Union[DdpgAgent, PpoAgent, TrpoAgent]


@unique
class AlgorithmId(Enum):
    DDPG = 'ddpg'
    TRPO = 'trpo'
    PPO = 'ppo'

    def __str__(self):
        return self.value

    @property
    def label(self) -> str:
        return self.value.upper()


@dataclass(frozen=True, eq=False)
class AgentCheckpoint:
    algorithm_id: AlgorithmId
    env_fingerprint: str
    networks: Dict[str, MlpParams]
    vectors: Dict[str, numpy.ndarray] = field(default_factory=dict)
    optimizers: Dict[str, AdamState] = field(default_factory=dict)
    env_steps: int = 0

    def __str__(self):
        nets = ', '.join(f'{name}={params}' for name, params in sorted(self.networks.items()))
        return f'AgentCheckpoint({self.algorithm_id}, env={self.env_fingerprint[:12]}, {nets}, env_steps={self.env_steps})'


def to_checkpoint(agent: Agent, env_fingerprint: str, env_steps: int, with_optimizers: bool = True) -> AgentCheckpoint:
    if isinstance(agent, DdpgAgent):
        return AgentCheckpoint(
            algorithm_id=AlgorithmId.DDPG,
            env_fingerprint=env_fingerprint,
            networks={
                'actor': agent.actor, 'critic': agent.critic,
                'target_actor': agent.target_actor, 'target_critic': agent.target_critic,
            },
            optimizers={'actor': agent.actor_opt, 'critic': agent.critic_opt} if with_optimizers else {},
            env_steps=env_steps,
        )

    algorithm_id = AlgorithmId.PPO if isinstance(agent, PpoAgent) else AlgorithmId.TRPO
    optimizers = {'value': agent.value_opt}
    if isinstance(agent, PpoAgent):
        optimizers['policy'] = agent.policy_opt
    return AgentCheckpoint(
        algorithm_id=algorithm_id,
        env_fingerprint=env_fingerprint,
        networks={'policy_mean': agent.policy.mean_net, 'value': agent.value_net},
        vectors={'log_std': agent.policy.log_std.copy()},
        optimizers=optimizers if with_optimizers else {},
        env_steps=env_steps,
    )


def policy_from_checkpoint(ckpt: AgentCheckpoint) -> MlpParams:
    """Deterministic acting network: the DDPG actor or the Gaussian policy mean."""
    name = 'actor' if ckpt.algorithm_id == AlgorithmId.DDPG else 'policy_mean'
    try:
        return ckpt.networks[name]
    except KeyError:
        raise MalformedCheckpointError(f'{ckpt.algorithm_id} checkpoint has no "{name}" network')

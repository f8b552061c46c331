"""
Цикл обучения экспертов: DDPG, TRPO и PPO на одной и той же среде.

Результат - чекпоинт агента и отчёт с наградами по эпизодам. При одинаковом seed
отчёт (кроме wall_seconds) совпадает побитово.

"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Tuple, Union

import numpy

from prosthetics.algorithms.checkpoint import AgentCheckpoint, AlgorithmId, to_checkpoint
from prosthetics.algorithms.ddpg import DdpgConfig, ddpg_act, ddpg_update, make_ddpg_agent
from prosthetics.algorithms.ppo import PpoConfig, make_ppo_agent, ppo_update
from prosthetics.algorithms.replay import ReplayBuffer, Transition
from prosthetics.algorithms.rollouts import Episode, build_trajectory_batch, run_episode
from prosthetics.algorithms.trpo import TrpoConfig, make_trpo_agent, trpo_update
from prosthetics.defaults import ACTION_DIM
from prosthetics.exceptions import Prosthetics, ProstheticsConfigError, ProstheticsNumericalError
from prosthetics.stander import StanderEnv

logger = logging.getLogger(__name__)

EPISODES_PER_EPOCH = 10
FINAL_FRACTION = 0.1

Hyperparams = Union[DdpgConfig, PpoConfig, TrpoConfig]


@dataclass(frozen=True)
class Budget:
    episodes: int = 2000
    steps_per_episode: int = 1000

    def __post_init__(self):
        errors = []
        if self.episodes < 0:
            errors.append(f'budget.episodes must be >= 0 (got {self.episodes})')
        if self.steps_per_episode < 1:
            errors.append(f'budget.steps_per_episode must be >= 1 (got {self.steps_per_episode})')
        if errors:
            raise ProstheticsConfigError(errors=errors)


class UpdateRecord(NamedTuple):
    index: int
    accepted: bool
    kl: float
    loss: Optional[float]


@dataclass
class TrainReport:
    algorithm_id: AlgorithmId
    seed: int
    episode_returns: List[float] = field(default_factory=list)
    episode_lengths: List[int] = field(default_factory=list)
    epoch_means: List[float] = field(default_factory=list)
    epoch_maxes: List[float] = field(default_factory=list)
    env_steps: int = 0
    wall_seconds: float = 0.0
    updates: List[UpdateRecord] = field(default_factory=list)

    @property
    def episodes(self) -> int:
        return len(self.episode_returns)

    @property
    def max_return(self) -> float:
        return max(self.episode_returns) if self.episode_returns else math.nan

    @property
    def mean_full(self) -> float:
        return float(numpy.mean(self.episode_returns)) if self.episode_returns else math.nan

    @property
    def mean_final10pct(self) -> float:
        if not self.episode_returns:
            return math.nan
        tail = max(1, math.ceil(FINAL_FRACTION * self.episodes))
        return float(numpy.mean(self.episode_returns[-tail:]))

    @property
    def acceptance_rate(self) -> float:
        if not self.updates:
            return math.nan
        return sum(u.accepted for u in self.updates) / len(self.updates)

    def add_episode(self, episode: Episode):
        self.episode_returns.append(episode.total_reward)
        self.episode_lengths.append(episode.length)
        self.env_steps += episode.length
        if self.episodes % EPISODES_PER_EPOCH == 0:
            self._close_epoch()

    def finish(self, wall_seconds: float):
        if self.episodes % EPISODES_PER_EPOCH:
            self._close_epoch()
        self.wall_seconds = wall_seconds
        assert self.env_steps == sum(self.episode_lengths)

    def _close_epoch(self):
        start = len(self.epoch_means) * EPISODES_PER_EPOCH
        returns = self.episode_returns[start:]
        self.epoch_means.append(float(numpy.mean(returns)))
        self.epoch_maxes.append(max(returns))
        logger.info(
            f'{self.algorithm_id.label} seed {self.seed} epoch {len(self.epoch_means)}: '
            f'mean return {self.epoch_means[-1]:.2f}, max {self.epoch_maxes[-1]:.2f}, env steps {self.env_steps}',
        )


def default_hyperparams(algorithm_id: AlgorithmId) -> Hyperparams:
    return {
        AlgorithmId.DDPG: DdpgConfig,
        AlgorithmId.PPO: PpoConfig,
        AlgorithmId.TRPO: TrpoConfig,
    }[algorithm_id]()


def train(algorithm_id: AlgorithmId, env: StanderEnv, budget: Budget, seed: int,
          hyperparams: Optional[Hyperparams] = None) -> Tuple[AgentCheckpoint, TrainReport]:
    if hyperparams is None:
        hyperparams = default_hyperparams(algorithm_id)
    expected = type(default_hyperparams(algorithm_id))
    if not isinstance(hyperparams, expected):
        raise ProstheticsConfigError(f'{algorithm_id} training expects {expected.__name__}, but got {type(hyperparams).__name__}')

    agent_seed, episode_seq, noise_seq = numpy.random.SeedSequence(seed).spawn(3)
    episode_seeds = numpy.random.default_rng(episode_seq).integers(2 ** 31, size=budget.episodes)
    noise_rng = numpy.random.default_rng(noise_seq)
    report = TrainReport(algorithm_id, seed)

    logger.info(f'train {algorithm_id.label} seed {seed}: {budget.episodes} episodes x {budget.steps_per_episode} steps, {env}')
    started = time.perf_counter()
    if algorithm_id == AlgorithmId.DDPG:
        agent = make_ddpg_agent(hyperparams, int(agent_seed.generate_state(1)[0]))
        _train_ddpg(agent, hyperparams, env, budget, episode_seeds, noise_rng, report)
    else:
        if algorithm_id == AlgorithmId.PPO:
            agent = make_ppo_agent(hyperparams, int(agent_seed.generate_state(1)[0]))
        else:
            agent = make_trpo_agent(hyperparams, int(agent_seed.generate_state(1)[0]))
        _train_on_policy(agent, algorithm_id, hyperparams, env, budget, episode_seeds, noise_rng, report)
    report.finish(time.perf_counter() - started)

    logger.info(
        f'{algorithm_id.label} seed {seed} done: max return {report.max_return:.2f}, '
        f'mean {report.mean_full:.2f}, {report.env_steps} env steps, {len(report.updates)} updates',
    )
    return to_checkpoint(agent, env.cfg.fingerprint(), report.env_steps), report


def _train_ddpg(agent, cfg: DdpgConfig, env: StanderEnv, budget: Budget, episode_seeds: numpy.ndarray,
                noise_rng: numpy.random.Generator, report: TrainReport):
    buffer = ReplayBuffer(min(cfg.buffer_capacity, max(budget.episodes * budget.steps_per_episode, cfg.batch_size)))
    steps = 0

    def act(obs):
        if steps < cfg.warmup_steps:
            return noise_rng.uniform(0.0, 1.0, size=ACTION_DIM)
        return ddpg_act(agent, obs, explore=True, rng=noise_rng)

    def on_step(obs, action, reward, next_obs, fell):
        nonlocal steps
        buffer.push(Transition(obs, action, reward, next_obs, fell))
        steps += 1
        if steps < cfg.warmup_steps or steps % cfg.update_every or len(buffer) < cfg.batch_size:
            return
        try:
            critic_loss, _ = ddpg_update(agent, buffer.sample(cfg.batch_size, noise_rng))
        except ProstheticsNumericalError:
            logger.warning(f'ddpg update skipped at env step {steps}')
            report.updates.append(UpdateRecord(len(report.updates), accepted=False, kl=0.0, loss=None))
        else:
            report.updates.append(UpdateRecord(len(report.updates), accepted=True, kl=0.0, loss=critic_loss))

    for i, episode_seed in enumerate(episode_seeds):
        episode = _with_context(report, i, lambda s=int(episode_seed): run_episode(env, act, s, budget.steps_per_episode, on_step))
        report.add_episode(episode)


def _train_on_policy(agent, algorithm_id: AlgorithmId, cfg: Union[PpoConfig, TrpoConfig], env: StanderEnv, budget: Budget,
                     episode_seeds: numpy.ndarray, noise_rng: numpy.random.Generator, report: TrainReport):
    for start in range(0, budget.episodes, cfg.episodes_per_batch):
        episodes = []
        for i in range(start, min(start + cfg.episodes_per_batch, budget.episodes)):
            episode = _with_context(report, i, lambda s=int(episode_seeds[i]): run_episode(
                env, lambda obs: agent.policy.sample(obs, noise_rng), s, budget.steps_per_episode,
            ))
            report.add_episode(episode)
            episodes.append(episode)

        batch = build_trajectory_batch(agent.policy, agent.value_net, episodes, cfg.gamma, cfg.gae_lambda, cfg.reward_scale)
        if algorithm_id == AlgorithmId.PPO:
            losses = ppo_update(agent, batch, noise_rng)
            report.updates.append(UpdateRecord(
                len(report.updates), accepted=losses.skipped_minibatches == 0, kl=losses.approx_kl, loss=losses.value_loss,
            ))
        else:
            step = trpo_update(agent, batch)
            report.updates.append(UpdateRecord(len(report.updates), accepted=step.step_accepted, kl=step.kl_after, loss=None))


def _with_context(report: TrainReport, episode_index: int, run):
    try:
        return run()
    except Prosthetics:
        logger.error(f'{report.algorithm_id.label} seed {report.seed} failed in episode {episode_index}')
        raise

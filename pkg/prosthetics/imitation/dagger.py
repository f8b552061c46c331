"""
DAgger и три его модификации.

На каждой итерации ученик сам проходит траектории, каждое посещённое состояние
размечается (действием эксперта или победителем гейта) и добавляется в общий
датасет, после чего ученик заново обучается регрессией на всём датасете.

"""

import logging
from dataclasses import dataclass
from enum import Enum, unique
from typing import List, Optional, Tuple

import numpy

from prosthetics.algorithms.checkpoint import AgentCheckpoint, policy_from_checkpoint
from prosthetics.defaults import HIDDEN_DIMS
from prosthetics.exceptions import Prosthetics, ProstheticsCompatibilityError, ProstheticsConfigError, ProstheticsShapeError
from prosthetics.imitation.dataset import AggregatedDataset
from prosthetics.imitation.evaluation import evaluate
from prosthetics.imitation.labeling import label_return_gated, label_reward_gated, label_vanilla, select_action_epsilon
from prosthetics.imitation.policy import MlpPolicy, Policy, fit_policy
from prosthetics.stander import StanderEnv

logger = logging.getLogger(__name__)


@unique
class DaggerVariant(Enum):
    VANILLA = 'Vanilla'
    REWARD_GATED = 'RewardGated'
    RETURN_GATED = 'ReturnGated'
    EPSILON_GREEDY = 'EpsilonGreedy'

    def __str__(self):
        return self.value

    @classmethod
    def from_name(cls, name: str) -> 'DaggerVariant':
        normalized = name.replace('_', '').replace('-', '').lower()
        for variant in cls:
            if variant.value.lower() == normalized:
                return variant
        raise ProstheticsConfigError(f'unknown dagger variant "{name}", expect one of {", ".join(v.value for v in cls)}')


@dataclass(frozen=True)
class DaggerConfig:
    variant: DaggerVariant = DaggerVariant.VANILLA
    iterations: int = 5
    trajectories_per_iteration: int = 5
    regression_epochs: int = 200
    regression_lr: float = 1e-3
    epsilon: float = 0.1
    rollout_horizon: Optional[int] = None
    convergence_fraction: float = 0.9
    eval_episodes: int = 20
    minibatch_size: int = 256
    hidden_dims: Tuple[int, ...] = HIDDEN_DIMS

    def __post_init__(self):
        errors = []
        if not 0 <= self.epsilon <= 1:
            errors.append(f'dagger.epsilon must be in [0, 1] (got {self.epsilon})')
        if self.iterations < 1:
            errors.append(f'dagger.iterations must be >= 1 (got {self.iterations})')
        if not 0 < self.convergence_fraction <= 1:
            errors.append(f'dagger.convergence_fraction must be in (0, 1] (got {self.convergence_fraction})')
        if self.rollout_horizon is not None and self.rollout_horizon < 1:
            errors.append(f'dagger.rollout_horizon must be >= 1 (got {self.rollout_horizon})')
        if self.trajectories_per_iteration < 1 or self.eval_episodes < 1 or self.minibatch_size < 1:
            errors.append('dagger.trajectories_per_iteration, dagger.eval_episodes and dagger.minibatch_size must be >= 1')
        if errors:
            raise ProstheticsConfigError(errors=errors)


@dataclass(frozen=True)
class IterationReport:
    variant: DaggerVariant
    iteration: int
    dataset_size: int
    learner_mean: float
    learner_max: float
    expert_mean: float
    env_steps: int
    converged: bool
    iteration_env_steps: int = 0
    expert_labels: int = 0
    regression_loss_before: float = 0.0
    regression_loss_after: float = 0.0

    def __str__(self):
        return (
            f'{self.variant} iteration {self.iteration}: dataset {self.dataset_size}, '
            f'learner {self.learner_mean:.2f}/{self.learner_max:.2f}, expert {self.expert_mean:.2f}, '
            f'env steps {self.env_steps}, converged={self.converged}'
        )


def dagger_iteration(env: StanderEnv, expert: Policy, learner: MlpPolicy, dataset: AggregatedDataset, cfg: DaggerConfig,
                     rng: numpy.random.Generator, iteration: int = 1, env_steps_before: int = 0,
                     eval_seed: Optional[int] = None,
                     expert_mean: Optional[float] = None) -> Tuple[AggregatedDataset, MlpPolicy, IterationReport]:
    if eval_seed is None:
        eval_seed = int(rng.integers(2 ** 31))
    steps_at_start = env.steps_consumed
    size_before = len(dataset)
    expert_labels = 0

    for trajectory in range(cfg.trajectories_per_iteration):
        try:
            expert_labels += _collect_trajectory(env, expert, learner, dataset, cfg, rng)
        except Prosthetics:
            logger.error(f'{cfg.variant} iteration {iteration}: trajectory {trajectory} failed')
            raise
    dataset.close_iteration()
    iteration_env_steps = env.steps_consumed - steps_at_start

    obs, labels = dataset.arrays()
    params, loss_before, loss_after = fit_policy(
        learner.params, obs, labels, cfg.regression_epochs, cfg.regression_lr, cfg.minibatch_size, rng,
    )
    learner = MlpPolicy(params)

    learner_eval = evaluate(learner, env, cfg.eval_episodes, eval_seed)
    if expert_mean is None:
        expert_mean = evaluate(expert, env, cfg.eval_episodes, eval_seed).mean_return

    report = IterationReport(
        variant=cfg.variant,
        iteration=iteration,
        dataset_size=len(dataset),
        learner_mean=learner_eval.mean_return,
        learner_max=learner_eval.max_return,
        expert_mean=expert_mean,
        env_steps=env_steps_before + iteration_env_steps,
        converged=learner_eval.mean_return >= cfg.convergence_fraction * expert_mean,
        iteration_env_steps=iteration_env_steps,
        expert_labels=expert_labels,
        regression_loss_before=loss_before,
        regression_loss_after=loss_after,
    )
    assert report.dataset_size > size_before
    logger.info(f'{report} (regression loss {loss_before:.5f} -> {loss_after:.5f})')
    return dataset, learner, report


def run_dagger(env: StanderEnv, expert_checkpoint: AgentCheckpoint, cfg: DaggerConfig, seed: int) -> List[IterationReport]:
    fingerprint = env.cfg.fingerprint()
    if expert_checkpoint.env_fingerprint != fingerprint:
        raise ProstheticsCompatibilityError(
            f'expert trained on env {expert_checkpoint.env_fingerprint[:12]}, but dagger runs on env {fingerprint[:12]}',
        )
    try:
        expert = MlpPolicy(policy_from_checkpoint(expert_checkpoint))
    except ProstheticsShapeError as e:
        raise ProstheticsCompatibilityError(f'expert does not share the learner spaces: {e}')

    rng = numpy.random.default_rng(seed)
    learner = MlpPolicy.fresh(int(rng.integers(2 ** 31)), cfg.hidden_dims)
    eval_seed = int(rng.integers(2 ** 31))
    expert_mean = evaluate(expert, env, cfg.eval_episodes, eval_seed).mean_return
    logger.info(f'{cfg.variant} seed {seed}: expert mean return {expert_mean:.2f}')

    dataset = AggregatedDataset()
    reports: List[IterationReport] = []
    env_steps = 0
    for iteration in range(1, cfg.iterations + 1):
        dataset, learner, report = dagger_iteration(
            env, expert, learner, dataset, cfg, rng,
            iteration=iteration, env_steps_before=env_steps, eval_seed=eval_seed, expert_mean=expert_mean,
        )
        reports.append(report)
        env_steps = report.env_steps
        if report.learner_mean > report.expert_mean:
            logger.warning(
                f'{cfg.variant} iteration {iteration}: learner ({report.learner_mean:.2f}) outperforms '
                f'expert ({report.expert_mean:.2f}), roles could be exchanged',
            )
        if report.converged:
            break

    if expert_checkpoint.env_steps > 0:
        logger.info(
            f'{cfg.variant} seed {seed}: learner used {env_steps} env steps, '
            f'{env_steps / expert_checkpoint.env_steps:.1%} of the expert training ({expert_checkpoint.env_steps})',
        )
    return reports


def _collect_trajectory(env: StanderEnv, expert: Policy, learner: MlpPolicy, dataset: AggregatedDataset,
                        cfg: DaggerConfig, rng: numpy.random.Generator) -> int:
    """Roll one learner episode, labelling every visited state; returns the count of expert-labelled states."""
    obs = env.reset(int(rng.integers(2 ** 31)))
    expert_labels = 0
    done = False
    while not done:
        a_target = learner.act(obs)
        a_expert = label_vanilla(expert, obs)
        executed = a_target
        label = a_expert
        expert_won = True
        if cfg.variant == DaggerVariant.REWARD_GATED:
            label, expert_won = label_reward_gated(env, env.snapshot(), a_expert, a_target)
        elif cfg.variant == DaggerVariant.RETURN_GATED:
            label, expert_won = label_return_gated(env, env.snapshot(), a_expert, a_target, expert, learner, cfg.rollout_horizon)
        elif cfg.variant == DaggerVariant.EPSILON_GREEDY:
            executed, _ = select_action_epsilon(a_expert, a_target, cfg.epsilon, rng)

        dataset.append(obs, label)
        expert_labels += expert_won
        result = env.step(executed)
        obs = result.observation
        done = result.done
    return expert_labels

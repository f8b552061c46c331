import logging
import os
from typing import List, Optional, Sequence, Tuple

from prosthetics.algorithms.checkpoint import AgentCheckpoint, AlgorithmId
from prosthetics.algorithms.training import TrainReport, train
from prosthetics.exceptions import Prosthetics, ProstheticsConfigError
from prosthetics.harness.checkpoint_io import save_checkpoint
from prosthetics.harness.config import ExperimentConfig
from prosthetics.harness.presenter import ConsolePresenter
from prosthetics.harness.reports import (
    BenchmarkRow,
    benchmark_frame,
    curve_filename,
    emit_learning_curve,
    summary_frame,
    write_csv,
)
from prosthetics.stander import make_env

logger = logging.getLogger(__name__)

BENCHMARK_CSV = 'benchmark.csv'
SUMMARY_CSV = 'benchmark_summary.csv'


def checkpoint_filename(algorithm_id: AlgorithmId, seed: int) -> str:
    return f'checkpoint_{algorithm_id.value}_{seed}.json'


def train_and_save(cfg: ExperimentConfig, algorithm_id: AlgorithmId, seed: int, out_dir: str) -> Tuple[AgentCheckpoint, TrainReport]:
    """Train one agent and write its checkpoint and learning curve into `out_dir`."""
    os.makedirs(out_dir, exist_ok=True)
    ckpt, report = train(algorithm_id, make_env(cfg.env), cfg.budget, seed, cfg.hyperparams(algorithm_id))
    save_checkpoint(os.path.join(out_dir, checkpoint_filename(algorithm_id, seed)), ckpt)
    if report.episode_returns:
        emit_learning_curve(report, os.path.join(out_dir, curve_filename(report)))
    return ckpt, report


def run_benchmark(cfg: ExperimentConfig, out_dir: Optional[str] = None,
                  algorithms: Sequence[AlgorithmId] = tuple(AlgorithmId)) -> str:
    if not cfg.seeds:
        raise ProstheticsConfigError('benchmark needs at least one seed')
    out_dir = out_dir or cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)

    rows: List[BenchmarkRow] = []
    for algorithm_id in algorithms:
        for seed in cfg.seeds:
            try:
                _, report = train_and_save(cfg, algorithm_id, seed, out_dir)
            except Prosthetics:
                logger.warning(f'{algorithm_id.label} seed {seed} failed, row marked as error')
                rows.append(BenchmarkRow(algorithm=algorithm_id.label, seed=seed))
            else:
                rows.append(BenchmarkRow.from_report(report))

    path = write_csv(benchmark_frame(rows), os.path.join(out_dir, BENCHMARK_CSV))
    summary = summary_frame(rows)
    write_csv(summary, os.path.join(out_dir, SUMMARY_CSV))

    presenter = ConsolePresenter()
    presenter.append_header(f'benchmark: {cfg.budget.episodes} episodes x {cfg.budget.steps_per_episode} steps')
    presenter.append_table(benchmark_frame(rows))
    presenter.append_header('across seeds')
    presenter.append_table(summary)
    presenter.present()
    return path

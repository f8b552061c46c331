"""
CSV-отчёты: сравнение алгоритмов, сравнение вариантов DAgger и кривые обучения.

Заголовки фиксированы, числа пишутся в простой десятичной записи с точкой.
Строки сортируются по (алгоритм/вариант, seed, индекс), поэтому при тех же
seed файлы совпадают побайтно (кроме колонки wall_seconds).

"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import pandas  # type: ignore

from prosthetics.algorithms.training import TrainReport
from prosthetics.exceptions import ProstheticsInsufficientData
from prosthetics.imitation.dagger import IterationReport

logger = logging.getLogger(__name__)

ERROR_MARKER = 'error'
RUNNING_MEAN_WINDOW = 100

BENCHMARK_COLUMNS = ['algorithm', 'seed', 'max_reward', 'mean_reward_full', 'mean_reward_final10pct', 'env_steps', 'wall_seconds']
SUMMARY_COLUMNS = ['algorithm', 'seeds', 'max_reward_mean', 'max_reward_std', 'mean_reward_full_mean', 'mean_reward_full_std']
DAGGER_COLUMNS = ['variant', 'seed', 'iteration', 'dataset_size', 'learner_mean', 'learner_max', 'expert_mean', 'env_steps', 'converged']
CURVE_COLUMNS = ['episode', 'return', 'running_mean_100']


@dataclass(frozen=True)
class BenchmarkRow:
    algorithm: str
    seed: int
    max_reward: Optional[float] = None
    mean_reward_full: Optional[float] = None
    mean_reward_final10pct: Optional[float] = None
    env_steps: Optional[int] = None
    wall_seconds: Optional[float] = None

    @property
    def failed(self) -> bool:
        return self.max_reward is None

    @classmethod
    def from_report(cls, report: TrainReport) -> 'BenchmarkRow':
        return cls(
            algorithm=report.algorithm_id.label,
            seed=report.seed,
            max_reward=report.max_return,
            mean_reward_full=report.mean_full,
            mean_reward_final10pct=report.mean_final10pct,
            env_steps=report.env_steps,
            wall_seconds=report.wall_seconds,
        )


@dataclass(frozen=True)
class DaggerRow:
    variant: str
    seed: int
    report: Optional[IterationReport] = None

    @property
    def failed(self) -> bool:
        return self.report is None


def decimal(value) -> str:
    if value is None:
        return ERROR_MARKER
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, int):
        return str(value)
    if math.isnan(value):
        return 'nan'
    return f'{value:.6f}'


def benchmark_frame(rows: Sequence[BenchmarkRow]) -> pandas.DataFrame:
    ordered = sorted(rows, key=lambda r: (r.algorithm, r.seed))
    return pandas.DataFrame(
        [[r.algorithm, str(r.seed), *(decimal(getattr(r, c)) for c in BENCHMARK_COLUMNS[2:])] for r in ordered],
        columns=BENCHMARK_COLUMNS,
    )


def summary_frame(rows: Sequence[BenchmarkRow]) -> pandas.DataFrame:
    """Across-seed mean and population std of the successful runs, per algorithm."""
    ok = pandas.DataFrame(
        [(r.algorithm, r.max_reward, r.mean_reward_full) for r in rows if not r.failed],
        columns=['algorithm', 'max_reward', 'mean_reward_full'],
    )
    summary = []
    for algorithm, group in ok.groupby('algorithm', sort=True):
        summary.append([
            algorithm,
            str(len(group)),
            decimal(float(group['max_reward'].mean())),
            decimal(float(group['max_reward'].std(ddof=0))),
            decimal(float(group['mean_reward_full'].mean())),
            decimal(float(group['mean_reward_full'].std(ddof=0))),
        ])
    return pandas.DataFrame(summary, columns=SUMMARY_COLUMNS)


def dagger_frame(rows: Sequence[DaggerRow]) -> pandas.DataFrame:
    records = []
    for row in sorted(rows, key=_dagger_key):
        if row.failed:
            records.append([row.variant, str(row.seed), *([ERROR_MARKER] * (len(DAGGER_COLUMNS) - 2))])
            continue
        report = row.report
        records.append([
            row.variant, str(row.seed), str(report.iteration), str(report.dataset_size),
            decimal(report.learner_mean), decimal(report.learner_max), decimal(report.expert_mean),
            str(report.env_steps), decimal(report.converged),
        ])
    return pandas.DataFrame(records, columns=DAGGER_COLUMNS)


def learning_curve_frame(report: TrainReport) -> pandas.DataFrame:
    if not report.episode_returns:
        raise ProstheticsInsufficientData(f'{report.algorithm_id.label} seed {report.seed} report has no episodes')
    returns = pandas.Series(report.episode_returns, dtype='float64')
    running = returns.rolling(RUNNING_MEAN_WINDOW, min_periods=1).mean()
    return pandas.DataFrame({
        'episode': [str(i) for i in range(1, len(returns) + 1)],
        'return': [decimal(float(x)) for x in returns],
        'running_mean_100': [decimal(float(x)) for x in running],
    }, columns=CURVE_COLUMNS)


def write_csv(frame: pandas.DataFrame, path: str) -> str:
    frame.to_csv(path, index=False, lineterminator='\n')
    logger.info(f'{len(frame)} rows written to {path}')
    return path


def emit_learning_curve(report: TrainReport, path: str) -> str:
    return write_csv(learning_curve_frame(report), path)


def curve_filename(report: TrainReport) -> str:
    return f'curve_{report.algorithm_id.value}_{report.seed}.csv'


def _dagger_key(row: DaggerRow) -> Tuple[str, int, int]:
    return row.variant, row.seed, 0 if row.report is None else row.report.iteration


def dagger_rows(variant: str, seed: int, reports: List[IterationReport]) -> List[DaggerRow]:
    return [DaggerRow(variant, seed, report) for report in reports]

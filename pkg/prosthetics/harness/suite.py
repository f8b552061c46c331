import dataclasses
import logging
import os
from typing import List, Optional, Sequence

from prosthetics.algorithms.checkpoint import AgentCheckpoint
from prosthetics.exceptions import Prosthetics, ProstheticsCompatibilityError, ProstheticsConfigError
from prosthetics.harness.config import ExperimentConfig
from prosthetics.harness.presenter import ConsolePresenter
from prosthetics.harness.reports import DaggerRow, dagger_frame, dagger_rows, write_csv
from prosthetics.imitation.dagger import DaggerVariant, run_dagger
from prosthetics.stander import make_env

logger = logging.getLogger(__name__)

DAGGER_CSV = 'dagger.csv'


def run_dagger_suite(cfg: ExperimentConfig, expert_checkpoint: AgentCheckpoint, out_dir: Optional[str] = None,
                     variants: Sequence[DaggerVariant] = tuple(DaggerVariant)) -> str:
    if not cfg.seeds:
        raise ProstheticsConfigError('dagger suite needs at least one seed')
    out_dir = out_dir or cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)

    rows: List[DaggerRow] = []
    for variant in variants:
        dagger_cfg = dataclasses.replace(cfg.dagger, variant=variant)
        for seed in cfg.seeds:
            try:
                reports = run_dagger(make_env(cfg.env), expert_checkpoint, dagger_cfg, seed)
            except ProstheticsCompatibilityError:
                raise
            except Prosthetics:
                logger.warning(f'{variant} seed {seed} failed, row marked as error')
                rows.append(DaggerRow(str(variant), seed))
            else:
                rows.extend(dagger_rows(str(variant), seed, reports))

    frame = dagger_frame(rows)
    path = write_csv(frame, os.path.join(out_dir, DAGGER_CSV))

    presenter = ConsolePresenter()
    presenter.append_header(f'dagger: expert {expert_checkpoint.algorithm_id.label}, {len(cfg.seeds)} seeds')
    presenter.append_table(frame)
    presenter.present()
    return path

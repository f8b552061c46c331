"""
Командная строка: обучение экспертов, сравнение алгоритмов, DAgger, оценка и проверки.

    prosthetics train --algorithm ddpg --config configs/quick.yaml --seed 1
    prosthetics benchmark --config configs/default.yaml --out results/
    prosthetics dagger --config configs/default.yaml --expert results/checkpoint_ddpg_0.json
    prosthetics eval --checkpoint results/checkpoint_ddpg_0.json
    prosthetics verify

"""

import argparse
import logging
import os
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Union

from prosthetics.algorithms.checkpoint import AlgorithmId, policy_from_checkpoint
from prosthetics.exceptions import Prosthetics
from prosthetics.harness.benchmark import run_benchmark, train_and_save
from prosthetics.harness.checkpoint_io import load_checkpoint
from prosthetics.harness.config import TASKS, ExperimentConfig, load_config
from prosthetics.harness.presenter import ConsolePresenter
from prosthetics.harness.suite import run_dagger_suite
from prosthetics.harness.verify import verify
from prosthetics.imitation.dagger import DaggerVariant
from prosthetics.imitation.evaluation import evaluate
from prosthetics.imitation.policy import MlpPolicy, Policy
from prosthetics.oracle import OraclePolicy
from prosthetics.stander import make_env


@dataclass(frozen=True)
class TrainCommand:
    algorithm: AlgorithmId
    config: str
    seed: int
    out: Optional[str]
    task: Optional[str]


@dataclass(frozen=True)
class BenchmarkCommand:
    config: str
    out: Optional[str]
    task: Optional[str]
    algorithms: Sequence[AlgorithmId] = tuple(AlgorithmId)


@dataclass(frozen=True)
class DaggerCommand:
    config: str
    expert: str
    out: Optional[str]
    task: Optional[str]
    variants: Sequence[DaggerVariant] = tuple(DaggerVariant)
    allow_mismatch: bool = False


@dataclass(frozen=True)
class EvalCommand:
    checkpoint: Optional[str]
    oracle: bool
    config: Optional[str]
    episodes: int
    seed: int
    task: Optional[str]
    allow_mismatch: bool = False


@dataclass(frozen=True)
class VerifyCommand:
    seed: int


Command = Union[TrainCommand, BenchmarkCommand, DaggerCommand, EvalCommand, VerifyCommand]


@dataclass(frozen=True)
class Invocation:
    command: Command
    verbose: bool = False
    quiet: bool = False


def _algorithm_list(value: str) -> List[AlgorithmId]:
    try:
        return [AlgorithmId(v.strip().lower()) for v in value.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f'expect comma separated subset of {",".join(a.value for a in AlgorithmId)}')


def _variant_list(value: str) -> List[DaggerVariant]:
    try:
        return [DaggerVariant.from_name(v.strip()) for v in value.split(',') if v.strip()]
    except Prosthetics:
        raise argparse.ArgumentTypeError(f'expect comma separated subset of {",".join(v.value for v in DaggerVariant)}')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='prosthetics', description='expert training and DAgger variants on a muscle-driven stander')
    parser.add_argument('--verbose', action='store_true', help='debug logging')
    parser.add_argument('--quiet', action='store_true', help='suppress non-error messages')
    commands = parser.add_subparsers(dest='command', required=True)

    train_parser = commands.add_parser('train', help='train one expert agent')
    train_parser.add_argument('--algorithm', type=str.lower, required=True, choices=[a.value for a in AlgorithmId])
    train_parser.add_argument('--config', type=str, required=True, help='experiment .yaml config')
    train_parser.add_argument('--seed', type=int, default=0)
    train_parser.add_argument('--out', type=str, default=None, help='output directory [config output_dir by default]')
    train_parser.add_argument('--task', type=str, default=None, choices=TASKS)

    benchmark_parser = commands.add_parser('benchmark', help='train every algorithm for every seed, write benchmark.csv')
    benchmark_parser.add_argument('--config', type=str, required=True, help='experiment .yaml config')
    benchmark_parser.add_argument('--out', type=str, default=None, help='output directory [config output_dir by default]')
    benchmark_parser.add_argument('--task', type=str, default=None, choices=TASKS)
    benchmark_parser.add_argument('--algorithms', type=_algorithm_list, default=list(AlgorithmId), help='comma separated, all by default')

    dagger_parser = commands.add_parser('dagger', help='run DAgger variants against an expert checkpoint, write dagger.csv')
    dagger_parser.add_argument('--config', type=str, required=True, help='experiment .yaml config')
    dagger_parser.add_argument('--expert', type=str, required=True, help='expert checkpoint file')
    dagger_parser.add_argument('--out', type=str, default=None, help='output directory [config output_dir by default]')
    dagger_parser.add_argument('--task', type=str, default=None, choices=TASKS)
    dagger_parser.add_argument('--variants', type=_variant_list, default=list(DaggerVariant), help='comma separated, all by default')
    dagger_parser.add_argument('--allow-mismatch', action='store_true', help='accept an expert trained on another env config')

    eval_parser = commands.add_parser('eval', help='mean and max return of a checkpoint or of the oracle controller')
    source = eval_parser.add_mutually_exclusive_group(required=True)
    source.add_argument('--checkpoint', type=str, default=None, help='agent checkpoint file')
    source.add_argument('--oracle', action='store_true', help='evaluate the built-in proportional controller')
    eval_parser.add_argument('--config', type=str, default=None, help='experiment .yaml config [defaults when omitted]')
    eval_parser.add_argument('--episodes', type=int, default=20)
    eval_parser.add_argument('--seed', type=int, default=0)
    eval_parser.add_argument('--task', type=str, default=None, choices=TASKS)
    eval_parser.add_argument('--allow-mismatch', action='store_true', help='accept a checkpoint trained on another env config')

    verify_parser = commands.add_parser('verify', help='run the fast property and oracle checks')
    verify_parser.add_argument('--seed', type=int, default=0)
    return parser


def parse_cli(argv: Optional[Sequence[str]] = None) -> Invocation:
    args = build_parser().parse_args(argv)
    command: Command
    if args.command == 'train':
        command = TrainCommand(AlgorithmId(args.algorithm), args.config, args.seed, args.out, args.task)
    elif args.command == 'benchmark':
        command = BenchmarkCommand(args.config, args.out, args.task, tuple(args.algorithms))
    elif args.command == 'dagger':
        command = DaggerCommand(args.config, args.expert, args.out, args.task, tuple(args.variants), args.allow_mismatch)
    elif args.command == 'eval':
        command = EvalCommand(args.checkpoint, args.oracle, args.config, args.episodes, args.seed, args.task, args.allow_mismatch)
    else:
        command = VerifyCommand(args.seed)
    return Invocation(command, verbose=bool(args.verbose), quiet=bool(args.quiet))


def _experiment(config: Optional[str], task: Optional[str]) -> ExperimentConfig:
    cfg = load_config(config) if config else ExperimentConfig()
    return cfg.with_task(task)


def run_train(cmd: TrainCommand) -> int:
    cfg = _experiment(cmd.config, cmd.task)
    out_dir = cmd.out or cfg.output_dir
    _, report = train_and_save(cfg, cmd.algorithm, cmd.seed, out_dir)

    presenter = ConsolePresenter()
    presenter.append_header(f'{cmd.algorithm.label} seed {cmd.seed}')
    presenter.append_table([
        ['episodes', report.episodes],
        ['max reward', report.max_return],
        ['mean reward (full run)', report.mean_full],
        ['mean reward (final 10%)', report.mean_final10pct],
        ['env steps', report.env_steps],
        ['wall seconds', report.wall_seconds],
    ], headers=['', 'value'], floatfmt='.2f')
    presenter.present()
    return 0


def run_eval(cmd: EvalCommand) -> int:
    cfg = _experiment(cmd.config, cmd.task)
    env = make_env(cfg.env)
    policy: Policy
    if cmd.oracle:
        policy, title = OraclePolicy(env.mix), 'oracle controller'
    else:
        ckpt = load_checkpoint(cmd.checkpoint, env.cfg.fingerprint(), cmd.allow_mismatch)
        policy, title = MlpPolicy(policy_from_checkpoint(ckpt)), f'{ckpt.algorithm_id.label} {os.path.basename(cmd.checkpoint)}'
    result = evaluate(policy, env, cmd.episodes, cmd.seed)

    presenter = ConsolePresenter()
    presenter.append_header(f'{title}: {cmd.episodes} episodes, seed {cmd.seed}')
    presenter.append_table([[result.mean_return, result.max_return]], headers=['mean return', 'max return'], floatfmt='.4f')
    presenter.present()
    return 0


def dispatch(command: Command) -> int:
    if isinstance(command, TrainCommand):
        return run_train(command)
    if isinstance(command, BenchmarkCommand):
        run_benchmark(_experiment(command.config, command.task), command.out, command.algorithms)
        return 0
    if isinstance(command, DaggerCommand):
        cfg = _experiment(command.config, command.task)
        expert = load_checkpoint(command.expert, cfg.env.fingerprint(), command.allow_mismatch)
        if command.allow_mismatch:
            expert = replace(expert, env_fingerprint=cfg.env.fingerprint())
        run_dagger_suite(cfg, expert, command.out, command.variants)
        return 0
    if isinstance(command, EvalCommand):
        return run_eval(command)
    passed, _ = verify(command.seed)
    return 0 if passed else 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    invocation = parse_cli(argv)

    if invocation.verbose:
        logging.basicConfig(level=logging.DEBUG)
    elif invocation.quiet:
        logging.basicConfig(level=logging.ERROR)
    else:
        logging.basicConfig(level=logging.INFO)

    try:
        return dispatch(invocation.command)
    except Prosthetics:
        return 1


# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Command-line interface.

    tracks   write the preset track sections (spec and waypoints)
    collect  collect expert episodes and segment them into task datasets
    train    train method arms on the collected task datasets
    eval     roll out saved policies and the expert baselines on a track section
    run      full experiment
    plot     rebuild plot data and charts from the metric files of a run

Exit codes: 0 success, 1 usage error, 2 runtime failure.

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence

from config.global_constants import DEFAULT_OUT_DIR, ENV_OUT_DIR
from src.continual.method_enum import LearningMethod
from src.experts.controller import ExpertKind
from src.geometry.track import PRESET_SPECS
from src.harness.experiment import (ExperimentConfig, build_tracks, collect_experience, evaluate_baselines,
                                    load_experiment_config, load_tasks, run_experiment, save_experiment_config,
                                    segment_experience, train_arm, write_arm, write_episodes, write_rollouts,
                                    write_tasks, write_tracks)
from src.harness.plots import emit_plots, plot_data_from_metrics
from src.harness.rollout import rollout_closed_loop, save_traces, trace_array
from src.policy.model_file import load_policy
from src.policy.normalizer import fit_normalizer
from src.tools.custom_errors import HarnessError, LifetrackError, UsageError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2


class LifetrackArgumentParser(argparse.ArgumentParser):
    """Reports usage errors as UsageError instead of exiting."""

    def error(self, message: str):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _seed(token: str) -> int:

    try:
        value = int(token)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got '{token}'")

    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got '{token}'")

    return value


def _velocity(token: str) -> float:

    try:
        value = float(token)
    except ValueError:
        raise argparse.ArgumentTypeError(f"velocity must be a number, got '{token}'")

    if not value > 0:
        raise argparse.ArgumentTypeError(f"velocity must be positive, got '{token}'")

    return value


def build_parser() -> LifetrackArgumentParser:

    common = LifetrackArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment config file (key = value)")
    common.add_argument("--seed", type=_seed, help="root seed, overrides the config")
    common.add_argument("--out", type=Path, help="output directory, overrides the config")
    common.add_argument("--no-progress", action="store_true", help="hide progress bars")

    parser = LifetrackArgumentParser(prog="lifetrack",
                                     description="Continual learning of an adaptive path-tracking policy.")
    subparsers = parser.add_subparsers(dest="command", metavar="command", required=True)

    tracks = subparsers.add_parser("tracks", parents=[common], help="write the preset track sections")
    tracks.add_argument("--section", action="append", choices=sorted(PRESET_SPECS),
                        help="section to write (repeatable), default all presets")

    collect = subparsers.add_parser("collect", parents=[common], help="collect expert episodes and task datasets")
    collect.add_argument("--expert", choices=[kind.value for kind in ExpertKind], help="expert, overrides the config")

    train = subparsers.add_parser("train", parents=[common], help="train method arms on collected datasets")
    train.add_argument("--method", choices=[method.value for method in LearningMethod],
                       help="train a single method arm, default all configured methods")
    train.add_argument("--data", type=Path, help="task dataset directory, default <out>/datasets")

    evaluate = subparsers.add_parser("eval", parents=[common], help="roll out saved policies and the baselines")
    evaluate.add_argument("--model", type=Path, action="append", help="model file (repeatable), default <out>/models")
    evaluate.add_argument("--section", choices=sorted(PRESET_SPECS), help="track section, default the test section")
    evaluate.add_argument("--velocity", type=_velocity, help="reference speed [m/s], default the evaluation speed")
    evaluate.add_argument("--no-baselines", action="store_true", help="skip the expert baselines")

    subparsers.add_parser("run", parents=[common], help="full experiment")
    subparsers.add_parser("plot", parents=[common], help="plot data and charts from the metrics of a run")

    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """Config file (or defaults) with the command-line overrides applied."""

    if args.config is not None:
        cfg = load_experiment_config(args.config)
    else:
        cfg = ExperimentConfig(out_dir=Path(os.getenv(ENV_OUT_DIR, str(DEFAULT_OUT_DIR))))

    return cfg.with_overrides(seed=args.seed, out_dir=args.out, progress=False if args.no_progress else None)


def _command_tracks(args: argparse.Namespace) -> None:

    cfg = load_config(args)
    sections = args.section or sorted(PRESET_SPECS)
    files = write_tracks(cfg.out_dir, build_tracks(sections, cfg.ds))

    logger.info(f"-> {len(files)} track files written to {cfg.out_dir / 'tracks'}")


def _command_collect(args: argparse.Namespace) -> None:

    cfg = load_config(args)
    if args.expert is not None:
        cfg = replace(cfg, expert=ExpertKind.from_str(args.expert))

    tracks = build_tracks(cfg.train_sections, cfg.ds)
    episodes = collect_experience(cfg, tracks)
    tasks = segment_experience(cfg, episodes)

    files = save_experiment_config(cfg.out_dir, cfg)
    files += write_tracks(cfg.out_dir, tracks)
    files += write_episodes(cfg.out_dir, episodes)
    files += write_tasks(cfg.out_dir, tasks)

    logger.info(f"-> {len(tasks)} task datasets from {len(episodes)} episodes, {len(files)} files written")


def _command_train(args: argparse.Namespace) -> None:

    cfg = load_config(args)
    methods = [LearningMethod.from_str(args.method)] if args.method is not None else list(cfg.methods)

    tasks = load_tasks(args.data if args.data is not None else cfg.out_dir / "datasets")
    norm = fit_normalizer(tasks)
    test_path = build_tracks([cfg.test_section], cfg.ds)[cfg.test_section][1]

    for method in methods:
        arm = train_arm(cfg, method, tasks, norm, test_path)
        write_arm(cfg.out_dir, arm, tasks)


def _command_eval(args: argparse.Namespace) -> None:

    cfg = load_config(args)
    section_id = args.section or cfg.test_section
    v_ref = args.velocity if args.velocity is not None else cfg.eval_velocity
    model_paths = args.model or sorted((cfg.out_dir / "models").glob("*.txt"))

    if len(model_paths) == 0 and args.no_baselines:
        raise HarnessError(f"Nothing to evaluate: no model files in {cfg.out_dir / 'models'} and baselines disabled")

    path = build_tracks([section_id], cfg.ds)[section_id][1]
    rollouts = {}

    for model_path in model_paths:
        net, norm = load_policy(model_path)
        rollouts[Path(model_path).stem] = rollout_closed_loop(net, norm, path, v_ref, cfg.vehicle, cfg.sim_cfg,
                                                              section_id=section_id, lookahead=cfg.lookahead,
                                                              name=Path(model_path).stem)

    metrics_dir = cfg.out_dir / "metrics"

    if len(rollouts) > 0:
        write_rollouts(metrics_dir / "evaluation.csv", rollouts)

    if not args.no_baselines:
        baselines = evaluate_baselines(cfg, path, v_ref=v_ref, section_id=section_id)
        write_rollouts(metrics_dir / "baselines.csv", baselines)
        rollouts.update(baselines)

    save_traces(metrics_dir / "traces.csv", {name: trace_array(traj, path) for name, (_, traj) in rollouts.items()})

    for name, (report, _) in rollouts.items():
        print(f"{name}: mean dev {report.mean_dev:.4f} m, max dev {report.max_dev:.4f} m, "
              f"completed {'yes' if report.completed else 'no'}")


def _command_run(args: argparse.Namespace) -> None:
    run_experiment(load_config(args))


def _command_plot(args: argparse.Namespace) -> None:

    cfg = load_config(args)
    metrics_dir = cfg.out_dir / "metrics"

    if not metrics_dir.is_dir():
        raise HarnessError(f"No metrics directory {metrics_dir}")

    emit_plots(plot_data_from_metrics(metrics_dir), cfg.out_dir / "plots")


_COMMANDS = {
    "tracks": _command_tracks,
    "collect": _command_collect,
    "train": _command_train,
    "eval": _command_eval,
    "run": _command_run,
    "plot": _command_plot,
}


def cli(argv: Optional[Sequence[str]] = None) -> int:
    """
    :param argv: Arguments without the program name, default sys.argv[1:].
    :return: Exit code.
    """

    argv: List[str] = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()

    if len(argv) == 0:
        sys.stderr.write(parser.format_usage())
        return EXIT_USAGE

    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        sys.stderr.write(e.message + "\n")
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return int(e.code or 0)

    try:
        _COMMANDS[args.command](args)
    except LifetrackError as e:
        logger.error(f"{type(e).__name__}: {e.message}")
        if getattr(e, "list_wrong_keys", None):
            logger.error(f"Offending entries: {', '.join(str(key) for key in e.list_wrong_keys)}")
        return EXIT_FAILURE
    except OSError as e:
        logger.error(f"I/O failure: {e}")
        return EXIT_FAILURE

    return EXIT_OK

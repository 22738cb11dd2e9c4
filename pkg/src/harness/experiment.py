# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Experiment orchestration: configuration, the collection / segmentation / training / evaluation pipeline and
the results directory.

Pipeline of run_experiment:
    tracks -> expert episodes on the training sections -> failure filter, processing, task segmentation ->
    normalizer fitted on the curriculum training data and frozen -> per method arm: tasks trained in
    curriculum order, eval matrix row and test-section rollout after every task -> expert baselines on the
    test section -> outputs and manifest

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

import logging
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.global_constants import (DEFAULT_ABORT_DEVIATION, DEFAULT_BATCH_SIZE, DEFAULT_CONTROL_DT, DEFAULT_EPOCHS,
                                     DEFAULT_ETA, DEFAULT_EVAL_VELOCITY, DEFAULT_FAILURE_DEVIATION,
                                     DEFAULT_LEARNING_RATE, DEFAULT_LOOKAHEAD, DEFAULT_MEMORY_BATCH_SIZE,
                                     DEFAULT_OUT_DIR, DEFAULT_PATH_DS, DEFAULT_RESERVOIR_PER_TASK,
                                     DEFAULT_START_OFFSET, DEFAULT_SUBSTEPS, DEFAULT_TEST_SECTION,
                                     DEFAULT_TRAIN_FRACTION, DEFAULT_VX_LAG_TAU, ENV_OUT_DIR, MANIFEST_FILE_NAME,
                                     MAX_COLLECTION_VELOCITY, MIN_COLLECTION_VELOCITY, PATH_EXPERIMENT_CONFIG_SCHEMA)
from src.continual.memory import EVAL_IDS, save_memory
from src.continual.method_enum import LearningMethod
from src.continual.trainer import ContinualTrainer, TrainerConfig, TrainTaskStats, initial_network
from src.experience.processing import (TaskDataset, TaskKey, build_curriculum, load_task_dataset,
                                       save_task_dataset, segment_tasks)
from src.experience.trajectory import Trajectory, collect_episode, save_trajectory
from src.experts.controller import ExpertKind, make_expert
from src.experts.mpc import MpcConfig, load_mpc_config, save_mpc_config
from src.geometry.path import ReferencePath, save_waypoints_csv
from src.geometry.track import (PRESET_SPECS, TrackSpec, build_track_path, generate_track, preset_spec,
                                save_track_spec)
from src.harness.metrics import (EvalMatrix, RolloutReport, eval_matrix_update, save_eval_matrix,
                                 save_rollout_reports)
from src.harness.plots import PlotData, emit_plots
from src.harness.rollout import rollout_baselines, rollout_closed_loop, save_traces, trace_array
from src.policy.model_file import save_policy
from src.policy.normalizer import Normalizer, fit_normalizer
from src.policy.optimizer import OptimizerMethod
from src.tools.csv_io import write_csv
from src.tools.custom_errors import ConfigError, HarnessError
from src.tools.kv_config import config_hash, load_kv_file, save_kv_file
from src.tools.progress import make_worker
from src.tools.stage_machine import Stage, StageMachine
from src.utils.json_schema_validator import JSONSchemaValidator
from src.vehicle.model import SimConfig, VehicleParams, load_vehicle_params, save_vehicle_params

logger = logging.getLogger(__name__)

DEFAULT_TRAIN_SECTIONS = ("S2", "S3")
DEFAULT_VELOCITIES = (3.0, 6.0, 9.0, 12.0, 15.0)

TRAINING_COLUMNS = ("task_index", "task", "epochs", "final_loss", "total_steps", "projected_steps", "halved_steps",
                    "rejected_steps", "memory_size", "memory_loss_before", "memory_loss_after", "min_constraint_margin")
TASK_LABEL_COLUMNS = ("task_index", "task")
CONTROLLER_LABEL_COLUMNS = ("controller",)


def _as_list(value: Any) -> list:
    """A single key = value entry parses as a scalar, several as a list."""

    if value is None:
        return []

    return list(value) if isinstance(value, (list, tuple)) else [value]


@dataclass(frozen=True)
class ExperimentConfig:

    seed: int = 0
    out_dir: Path = DEFAULT_OUT_DIR
    train_sections: Tuple[str, ...] = DEFAULT_TRAIN_SECTIONS
    test_section: str = DEFAULT_TEST_SECTION
    velocities: Tuple[float, ...] = DEFAULT_VELOCITIES
    repetitions: int = 1
    eval_velocity: float = DEFAULT_EVAL_VELOCITY
    expert: ExpertKind = ExpertKind.MPC
    methods: Tuple[LearningMethod, ...] = tuple(LearningMethod)
    lookahead: float = DEFAULT_LOOKAHEAD
    ds: float = DEFAULT_PATH_DS
    dt: float = DEFAULT_CONTROL_DT
    substeps: int = DEFAULT_SUBSTEPS
    vx_lag_tau: float = DEFAULT_VX_LAG_TAU
    failure_deviation: float = DEFAULT_FAILURE_DEVIATION
    start_offset: float = DEFAULT_START_OFFSET
    train_fraction: float = DEFAULT_TRAIN_FRACTION
    hidden_units: int = 64
    epochs: int = DEFAULT_EPOCHS
    batch_size: int = DEFAULT_BATCH_SIZE
    memory_batch_size: int = DEFAULT_MEMORY_BATCH_SIZE
    optimizer: OptimizerMethod = OptimizerMethod.ADAM
    learning_rate: float = DEFAULT_LEARNING_RATE
    eta: float = DEFAULT_ETA
    eval_id: str = "steer_effort"
    reservoir_per_task: int = DEFAULT_RESERVOIR_PER_TASK
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    mpc: MpcConfig = field(default_factory=MpcConfig)
    progress: bool = True

    def __post_init__(self):

        object.__setattr__(self, "out_dir", Path(self.out_dir))
        object.__setattr__(self, "train_sections", tuple(str(section) for section in self.train_sections))
        object.__setattr__(self, "velocities", tuple(float(v_ref) for v_ref in self.velocities))
        object.__setattr__(self, "methods", tuple(self.methods))

        if self.test_section in self.train_sections:
            raise ConfigError(f"Test section {self.test_section} must not be part of the training curriculum",
                              list_wrong_keys=["train_sections", "test_section"])

        wrong_keys = []

        unknown = [section for section in self.train_sections + (self.test_section,) if section not in PRESET_SPECS]
        if len(unknown) > 0:
            logger.error(f"Unknown track sections: {', '.join(unknown)} (known: {', '.join(PRESET_SPECS)})")
            wrong_keys.append("train_sections/test_section")

        if len(self.train_sections) == 0 or len(set(self.train_sections)) != len(self.train_sections):
            wrong_keys.append("train_sections")

        if (len(self.velocities) == 0 or len(set(self.velocities)) != len(self.velocities)
                or not all(MIN_COLLECTION_VELOCITY <= v_ref <= MAX_COLLECTION_VELOCITY for v_ref in self.velocities)):
            wrong_keys.append("velocities")

        if len(self.methods) == 0 or len(set(self.methods)) != len(self.methods):
            wrong_keys.append("methods")

        if self.repetitions < 1:
            wrong_keys.append("repetitions")

        if self.eval_id not in EVAL_IDS:
            wrong_keys.append("eval_id")

        if not 0.0 < self.train_fraction < 1.0:
            wrong_keys.append("train_fraction")

        for key in ("lookahead", "ds", "eval_velocity", "failure_deviation"):
            if not getattr(self, key) > 0:
                wrong_keys.append(key)

        if len(wrong_keys) > 0:
            raise ConfigError("Invalid experiment configuration", list_wrong_keys=wrong_keys)

    @property
    def sim_cfg(self) -> SimConfig:
        return SimConfig(dt=self.dt, substeps=self.substeps, vx_lag_tau=self.vx_lag_tau)

    @property
    def layer_dims(self) -> Tuple[int, ...]:
        return 5, self.hidden_units, self.hidden_units, 1

    @property
    def sections(self) -> Tuple[str, ...]:
        return self.train_sections + (self.test_section,)

    @property
    def curriculum(self) -> List[TaskKey]:
        return build_curriculum(self.train_sections, self.velocities, self.repetitions)

    def trainer_config(self, method: LearningMethod) -> TrainerConfig:
        return TrainerConfig(method=method, epochs=self.epochs, batch_size=self.batch_size,
                             memory_batch_size=self.memory_batch_size, optimizer=self.optimizer,
                             learning_rate=self.learning_rate, seed=self.seed, eta=self.eta, eval_id=self.eval_id,
                             reservoir_per_task=self.reservoir_per_task)

    def with_overrides(self, seed: Optional[int] = None, out_dir: Optional[Path] = None,
                       progress: Optional[bool] = None) -> "ExperimentConfig":
        changes = {key: value for key, value in (("seed", seed), ("out_dir", out_dir), ("progress", progress))
                   if value is not None}
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        """Key = value rendering without the vehicle and MPC parameters."""

        return {
            "seed": self.seed,
            "out_dir": self.out_dir.as_posix(),
            "train_sections": list(self.train_sections),
            "test_section": self.test_section,
            "velocities": list(self.velocities),
            "repetitions": self.repetitions,
            "eval_velocity": float(self.eval_velocity),
            "expert": self.expert.value,
            "methods": [method.value for method in self.methods],
            "lookahead": float(self.lookahead),
            "ds": float(self.ds),
            "dt": float(self.dt),
            "substeps": self.substeps,
            "vx_lag_tau": float(self.vx_lag_tau),
            "failure_deviation": float(self.failure_deviation),
            "start_offset": float(self.start_offset),
            "train_fraction": float(self.train_fraction),
            "hidden_units": self.hidden_units,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "memory_batch_size": self.memory_batch_size,
            "optimizer": self.optimizer.value,
            "learning_rate": float(self.learning_rate),
            "eta": float(self.eta),
            "eval_id": self.eval_id,
            "reservoir_per_task": self.reservoir_per_task,
            "progress": self.progress,
        }

    def fingerprint(self) -> str:
        """sha256 over everything that changes results: output location and progress display excluded."""

        semantic = {key: value for key, value in self.to_dict().items() if key not in ("out_dir", "progress")}
        semantic.update({f"vehicle.{key}": float(value) for key, value in self.vehicle.to_dict().items()})
        semantic.update({f"mpc.{key}": value for key, value in self.mpc.to_dict().items()})

        return config_hash(semantic)

    @classmethod
    def from_dict(cls, config_dict: Dict[str, Any], source: str = "experiment config",
                  base_dir: Optional[Path] = None) -> "ExperimentConfig":
        """
        :param base_dir: Directory that relative vehicle_config / mpc_config paths refer to.
        :raises ConfigError: On schema violations or inconsistent settings.
        """

        JSONSchemaValidator(PATH_EXPERIMENT_CONFIG_SCHEMA).validate(config_dict, source)

        base_dir = Path(base_dir) if base_dir is not None else Path(".")
        get = config_dict.get

        vehicle = (load_vehicle_params(base_dir / str(config_dict["vehicle_config"]))
                   if "vehicle_config" in config_dict else VehicleParams())
        mpc = load_mpc_config(base_dir / str(config_dict["mpc_config"])) if "mpc_config" in config_dict else MpcConfig()

        return cls(
            seed=int(get("seed", 0)),
            out_dir=Path(str(get("out_dir", os.getenv(ENV_OUT_DIR, str(DEFAULT_OUT_DIR))))),
            train_sections=tuple(str(section) for section in _as_list(get("train_sections", DEFAULT_TRAIN_SECTIONS))),
            test_section=str(get("test_section", DEFAULT_TEST_SECTION)),
            velocities=tuple(float(v_ref) for v_ref in _as_list(get("velocities", DEFAULT_VELOCITIES))),
            repetitions=int(get("repetitions", 1)),
            eval_velocity=float(get("eval_velocity", DEFAULT_EVAL_VELOCITY)),
            expert=ExpertKind.from_str(str(get("expert", ExpertKind.MPC.value))),
            methods=tuple(LearningMethod.from_str(str(method))
                          for method in _as_list(get("methods", [method.value for method in LearningMethod]))),
            lookahead=float(get("lookahead", DEFAULT_LOOKAHEAD)),
            ds=float(get("ds", DEFAULT_PATH_DS)),
            dt=float(get("dt", DEFAULT_CONTROL_DT)),
            substeps=int(get("substeps", DEFAULT_SUBSTEPS)),
            vx_lag_tau=float(get("vx_lag_tau", DEFAULT_VX_LAG_TAU)),
            failure_deviation=float(get("failure_deviation", DEFAULT_FAILURE_DEVIATION)),
            start_offset=float(get("start_offset", DEFAULT_START_OFFSET)),
            train_fraction=float(get("train_fraction", DEFAULT_TRAIN_FRACTION)),
            hidden_units=int(get("hidden_units", 64)),
            epochs=int(get("epochs", DEFAULT_EPOCHS)),
            batch_size=int(get("batch_size", DEFAULT_BATCH_SIZE)),
            memory_batch_size=int(get("memory_batch_size", DEFAULT_MEMORY_BATCH_SIZE)),
            optimizer=OptimizerMethod.from_str(str(get("optimizer", OptimizerMethod.ADAM.value))),
            learning_rate=float(get("learning_rate", DEFAULT_LEARNING_RATE)),
            eta=float(get("eta", DEFAULT_ETA)),
            eval_id=str(get("eval_id", "steer_effort")),
            reservoir_per_task=int(get("reservoir_per_task", DEFAULT_RESERVOIR_PER_TASK)),
            vehicle=vehicle,
            mpc=mpc,
            progress=bool(get("progress", True)),
        )


def load_experiment_config(path: Path) -> ExperimentConfig:
    path = Path(path)
    return ExperimentConfig.from_dict(load_kv_file(path), source=str(path), base_dir=path.parent)


def save_experiment_config(directory: Path, cfg: ExperimentConfig) -> List[Path]:
    """Effective configuration as experiment.cfg next to the vehicle.cfg and mpc.cfg it references."""

    directory = Path(directory)
    config_dict = cfg.to_dict()
    config_dict.update({"vehicle_config": "vehicle.cfg", "mpc_config": "mpc.cfg"})

    save_vehicle_params(directory / "vehicle.cfg", cfg.vehicle)
    save_mpc_config(directory / "mpc.cfg", cfg.mpc)
    save_kv_file(directory / "experiment.cfg", config_dict, header_comments=["effective experiment configuration"])

    return [directory / "experiment.cfg", directory / "vehicle.cfg", directory / "mpc.cfg"]


@dataclass
class ArmResult:
    """Everything one method arm produced."""

    method: LearningMethod
    trainer: ContinualTrainer
    eval_matrix: EvalMatrix
    training: List[TrainTaskStats] = field(default_factory=list)
    rollouts: List[RolloutReport] = field(default_factory=list)
    final_trajectory: Optional[Trajectory] = None


@dataclass
class ExperimentResults:

    config: ExperimentConfig
    tracks: Dict[str, Tuple[TrackSpec, ReferencePath]] = field(default_factory=dict)
    episodes: List[Trajectory] = field(default_factory=list)
    tasks: List[TaskDataset] = field(default_factory=list)
    normalizer: Optional[Normalizer] = None
    arms: Dict[str, ArmResult] = field(default_factory=dict)
    baselines: Dict[str, Tuple[RolloutReport, Trajectory]] = field(default_factory=dict)
    files: List[Path] = field(default_factory=list)
    stages: StageMachine = field(default_factory=StageMachine)

    @property
    def test_path(self) -> Optional[ReferencePath]:
        entry = self.tracks.get(self.config.test_section)
        return entry[1] if entry is not None else None

    def traces(self) -> Dict[str, np.ndarray]:

        if self.test_path is None:
            return {}

        traces = {name: trace_array(arm.final_trajectory, self.test_path)
                  for name, arm in self.arms.items() if arm.final_trajectory is not None}
        traces.update({name: trace_array(traj, self.test_path) for name, (_, traj) in self.baselines.items()})

        return traces

    def plot_data(self) -> PlotData:
        curves = {name: [(float(arm.eval_matrix.B[k]), report.max_dev, report.mean_dev)
                         for k, report in enumerate(arm.rollouts)]
                  for name, arm in self.arms.items()}
        baselines = {name: (report.mean_dev, report.max_dev) for name, (report, _) in self.baselines.items()}
        return PlotData(curves=curves, baselines=baselines, traces=self.traces())


def build_tracks(sections: Sequence[str], ds: float = DEFAULT_PATH_DS) -> Dict[str, Tuple[TrackSpec, ReferencePath]]:

    tracks = {}

    for section_id in sections:
        spec = preset_spec(section_id)
        tracks[section_id] = (spec, build_track_path(spec, ds))
        logger.info(f"-> Track {section_id}: {tracks[section_id][1].length:.1f} m")

    return tracks


def collect_experience(cfg: ExperimentConfig, tracks: Dict[str, Tuple[TrackSpec, ReferencePath]]) -> List[Trajectory]:
    """One expert episode per curriculum key, in curriculum order."""

    expert = make_expert(cfg.expert, cfg.vehicle, cfg.mpc, cfg.lookahead)
    curriculum = cfg.curriculum
    worker = make_worker(len(curriculum), f"collect ({expert.name})", cfg.progress)
    episodes = []

    worker.start()

    for key in curriculum:
        episodes.append(collect_episode(expert, tracks[key.section_id][1], key.v_ref, cfg.vehicle, cfg.sim_cfg,
                                        seed=cfg.seed, section_id=key.section_id, repetition=key.repetition,
                                        start_offset=cfg.start_offset, lookahead=cfg.lookahead,
                                        abort_deviation=DEFAULT_ABORT_DEVIATION))
        worker.advance(postfix=key.label)

    worker.finish()

    failed = sum(int(traj.meta.failed) for traj in episodes)
    logger.info(f"-> {len(episodes)} episodes collected, {failed} failed")

    return episodes


def segment_experience(cfg: ExperimentConfig, episodes: Sequence[Trajectory]) -> List[TaskDataset]:

    tasks = segment_tasks(episodes, cfg.curriculum, seed=cfg.seed, lookahead=cfg.lookahead,
                          dev_threshold=cfg.failure_deviation, train_fraction=cfg.train_fraction, ds=cfg.ds)

    if len(tasks) == 0:
        raise HarnessError("No usable task: every episode failed or was too short")

    return tasks


def train_arm(cfg: ExperimentConfig, method: LearningMethod, tasks: Sequence[TaskDataset], norm: Normalizer,
              test_path: Optional[ReferencePath] = None) -> ArmResult:
    """
    Train the tasks in order. After every task the eval matrix row is filled and, with a test path, the
    policy is rolled out on it at the evaluation speed.
    """

    trainer_cfg = cfg.trainer_config(method)
    trainer = ContinualTrainer(initial_network(trainer_cfg, cfg.layer_dims), norm, trainer_cfg)
    arm = ArmResult(method=method, trainer=trainer, eval_matrix=EvalMatrix(len(tasks)))
    test_sets = [task.test_batch for task in tasks]

    worker = make_worker(len(tasks) * cfg.epochs, f"train ({method.value})", cfg.progress)
    worker.start()

    for k, task in enumerate(tasks):

        arm.training.append(trainer.train_task(task.train_batch, worker=worker))
        eval_matrix_update(arm.eval_matrix, trainer.net, norm, test_sets, k)

        if test_path is not None:
            report, traj = rollout_closed_loop(trainer.net, norm, test_path, cfg.eval_velocity, cfg.vehicle,
                                               cfg.sim_cfg, section_id=cfg.test_section, lookahead=cfg.lookahead,
                                               name=method.value)
            arm.rollouts.append(report)
            arm.final_trajectory = traj

    worker.finish()

    logger.info(f"-> Arm {method.value} trained on {len(tasks)} tasks, B = {arm.eval_matrix.B[-1]:.4e}")

    return arm


def evaluate_baselines(cfg: ExperimentConfig, path: ReferencePath, v_ref: Optional[float] = None,
                       section_id: Optional[str] = None) -> Dict[str, Tuple[RolloutReport, Trajectory]]:
    """Pure pursuit and MPC on the path, by default the test section at the evaluation speed."""

    controllers = [make_expert(kind, cfg.vehicle, cfg.mpc, cfg.lookahead) for kind in (ExpertKind.PP, ExpertKind.MPC)]
    return rollout_baselines(controllers, path, cfg.eval_velocity if v_ref is None else v_ref, cfg.vehicle,
                             cfg.sim_cfg, section_id=section_id or cfg.test_section, lookahead=cfg.lookahead)


def load_tasks(datasets_dir: Path) -> List[TaskDataset]:
    """Task datasets of a previous collection, in file name (= curriculum) order."""

    paths = sorted(Path(datasets_dir).glob("task_*.csv"))

    if len(paths) == 0:
        raise HarnessError(f"No task datasets found in {datasets_dir}")

    return [load_task_dataset(path) for path in paths]


def write_tracks(out_dir: Path, tracks: Dict[str, Tuple[TrackSpec, ReferencePath]]) -> List[Path]:

    files = []

    for section_id, (spec, _) in tracks.items():
        save_track_spec(Path(out_dir) / "tracks" / f"{section_id}.cfg", spec)
        files.append(Path(out_dir) / "tracks" / f"{section_id}.cfg")
        files.append(save_waypoints_csv(Path(out_dir) / "tracks" / f"{section_id}.csv", generate_track(spec)))

    return files


def write_episodes(out_dir: Path, episodes: Sequence[Trajectory]) -> List[Path]:

    files = []

    for traj in episodes:
        csv_path = save_trajectory(Path(out_dir) / "episodes" / f"{traj.name}.csv", traj)
        files.extend([csv_path, csv_path.with_suffix(".meta")])

    return files


def write_tasks(out_dir: Path, tasks: Sequence[TaskDataset]) -> List[Path]:

    files = []

    for index, task in enumerate(tasks, start=1):
        csv_path = save_task_dataset(Path(out_dir) / "datasets" / f"task_{index:02d}_{task.key.label}.csv", task,
                                     task_index=index)
        files.extend([csv_path, csv_path.with_suffix(".meta")])

    return files


def write_arm(out_dir: Path, arm: ArmResult, tasks: Sequence[TaskDataset]) -> List[Path]:

    out_dir = Path(out_dir)
    name = arm.method.value
    labels = [(index, task.key.label) for index, task in enumerate(tasks, start=1)]

    files = [save_policy(out_dir / "models" / f"{name}.txt", arm.trainer.net, arm.trainer.normalizer),
             save_eval_matrix(out_dir / "metrics" / f"eval_matrix_{name}.csv", arm.eval_matrix),
             write_csv(out_dir / "metrics" / f"training_{name}.csv", TRAINING_COLUMNS,
                       [label + (len(stats.epoch_losses), stats.final_loss, stats.total_steps, stats.projected_steps,
                                 stats.halved_steps, stats.rejected_steps, stats.memory_size,
                                 stats.memory_loss_before, stats.memory_loss_after, stats.min_constraint_margin)
                        for label, stats in zip(labels, arm.training)])]

    if len(arm.rollouts) > 0:
        files.append(save_rollout_reports(out_dir / "metrics" / f"rollouts_{name}.csv", arm.rollouts,
                                          labels[:len(arm.rollouts)], TASK_LABEL_COLUMNS))

    if arm.trainer.memory is not None:
        csv_path = out_dir / "metrics" / f"memory_{name}.csv"
        save_memory(csv_path, csv_path.with_suffix(".cfg"), arm.trainer.memory)
        files.extend([csv_path, csv_path.with_suffix(".cfg")])

    return files


def write_rollouts(path: Path, rollouts: Dict[str, Tuple[RolloutReport, Trajectory]]) -> Path:
    return save_rollout_reports(path, [report for report, _ in rollouts.values()],
                                [(name,) for name in rollouts], CONTROLLER_LABEL_COLUMNS)


def write_manifest(out_dir: Path, files: Sequence[Path], seed: int, fingerprint: str) -> Path:
    """File list relative to out_dir (sorted, manifest itself excluded), root seed and config hash."""

    out_dir = Path(out_dir)
    relative = sorted({Path(file).resolve().relative_to(out_dir.resolve()).as_posix() for file in files})
    lines = ["# lifetrack results manifest", f"seed = {seed}", f"config_hash = {fingerprint}",
             f"files = {len(relative)}"] + relative

    path = out_dir / MANIFEST_FILE_NAME
    with open(path, 'w', encoding="utf-8", newline="\n") as file:
        file.write("\n".join(lines) + "\n")

    return path


def read_manifest(path: Path) -> Tuple[int, str, List[str]]:
    """:return: Root seed, config hash and listed files."""

    with open(Path(path), 'r', encoding="utf-8") as file:
        lines = [line.strip() for line in file.read().splitlines() if len(line.strip()) > 0]

    header = {}
    files = []

    for line in lines[1:]:
        if " = " in line and len(files) == 0 and line.split(" = ", 1)[0] in ("seed", "config_hash", "files"):
            key, value = line.split(" = ", 1)
            header[key] = value
        else:
            files.append(line)

    if "seed" not in header or "config_hash" not in header or int(header.get("files", -1)) != len(files):
        raise HarnessError(f"Malformed manifest {path}")

    return int(header["seed"]), header["config_hash"], files


def write_outputs(results: ExperimentResults) -> List[Path]:

    cfg = results.config
    out_dir = cfg.out_dir

    files = save_experiment_config(out_dir, cfg)
    files += write_tracks(out_dir, results.tracks)
    files += write_episodes(out_dir, results.episodes)
    files += write_tasks(out_dir, results.tasks)

    for arm in results.arms.values():
        files += write_arm(out_dir, arm, results.tasks)

    if len(results.baselines) > 0:
        files.append(write_rollouts(out_dir / "metrics" / "baselines.csv", results.baselines))

    traces = results.traces()
    if len(traces) > 0:
        files.append(save_traces(out_dir / "metrics" / "traces.csv", traces))

    files += emit_plots(results.plot_data(), out_dir / "plots")
    files.append(write_manifest(out_dir, files, cfg.seed, cfg.fingerprint()))

    return files


def run_experiment(cfg: ExperimentConfig) -> ExperimentResults:
    """
    Full experiment. Configuration errors fail before any work; failed episodes are logged and skipped.

    :return: Results bundle, its files list holding every written output.
    """

    results = ExperimentResults(config=cfg)
    stages = results.stages

    logger.info(f"-> Experiment seed {cfg.seed}, {len(cfg.curriculum)} curriculum keys, "
                f"methods {', '.join(method.value for method in cfg.methods)}, output {cfg.out_dir}")

    results.tracks = build_tracks(cfg.sections, cfg.ds)
    stages.set_stage(Stage.TRACKS_READY)

    results.episodes = collect_experience(cfg, results.tracks)
    stages.set_stage(Stage.EPISODES_COLLECTED)

    results.tasks = segment_experience(cfg, results.episodes)
    stages.set_stage(Stage.TASKS_SEGMENTED)

    results.normalizer = fit_normalizer(results.tasks)
    stages.set_stage(Stage.NORMALIZER_FROZEN)

    for method in cfg.methods:
        results.arms[method.value] = train_arm(cfg, method, results.tasks, results.normalizer, results.test_path)
        stages.set_stage(Stage.ARMS_TRAINED)

    results.baselines = evaluate_baselines(cfg, results.test_path)
    stages.set_stage(Stage.BASELINES_EVALUATED)

    results.files = write_outputs(results)
    stages.set_stage(Stage.OUTPUTS_WRITTEN)

    logger.info(f"-> {len(results.files)} files written to {cfg.out_dir}")

    return results

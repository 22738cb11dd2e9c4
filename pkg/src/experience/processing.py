# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Experience processing and task segmentation.

A driven trajectory is treated as its own reference path: the preview point of every record is taken on
the path through the driven positions, so each (state, applied steering) pair is a demonstration of
tracking without error. Samples are grouped into tasks by (section, reference speed, repetition) and every
task is split into training and test samples by a seeded shuffle.

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from config.global_constants import DEFAULT_FAILURE_DEVIATION, DEFAULT_LOOKAHEAD, DEFAULT_PATH_DS, DEFAULT_TRAIN_FRACTION
from src.experience.trajectory import Trajectory, episode_failed
from src.geometry.path import ArcLengthTable, build_path, fit_spline, preview_point
from src.policy.sample import STATE_FEATURES, SampleBatch
from src.tools.csv_io import read_csv, write_csv
from src.tools.custom_errors import ExperienceError, GeometryError, TrajectoryTooShortError
from src.tools.kv_config import load_kv_file, save_kv_file
from src.tools.seeding import COMPONENT_SPLIT, derive_rng

logger = logging.getLogger(__name__)

DATASET_COLUMNS = STATE_FEATURES + ("a", "split")


@dataclass(frozen=True, order=True)
class TaskKey:

    section_id: str
    v_ref: float
    repetition: int = 0

    @property
    def label(self) -> str:
        return f"{self.section_id}_v{self.v_ref:g}_r{self.repetition}"


@dataclass(eq=False)
class TaskDataset:

    key: TaskKey
    batch: SampleBatch
    train_indices: np.ndarray
    test_indices: np.ndarray

    def __post_init__(self):

        self.train_indices = np.asarray(self.train_indices, dtype=int)
        self.test_indices = np.asarray(self.test_indices, dtype=int)

        if len(self.batch) == 0:
            raise ExperienceError(f"Task {self.key.label} has no samples")

        combined = np.concatenate([self.train_indices, self.test_indices])

        if combined.size != len(self.batch) or not np.array_equal(np.sort(combined), np.arange(len(self.batch))):
            raise ExperienceError(f"Task {self.key.label}: split indices must be disjoint and exhaustive")

    def __len__(self) -> int:
        return len(self.batch)

    @property
    def train_batch(self) -> SampleBatch:
        return self.batch.subset(self.train_indices)

    @property
    def test_batch(self) -> SampleBatch:
        return self.batch.subset(self.test_indices)

    @property
    def train_states(self) -> np.ndarray:
        return self.batch.states[self.train_indices]


def process_experience(traj: Trajectory, lookahead: float = DEFAULT_LOOKAHEAD,
                       ds: float = DEFAULT_PATH_DS) -> TaskDataset:
    """
    Samples of one episode, all in the training split.

    :raises TrajectoryTooShortError: If no record has lookahead of driven path ahead of it.
    """

    positions = traj.positions

    if positions.shape[0] < 4:
        raise TrajectoryTooShortError(f"Episode {traj.name} has {positions.shape[0]} records, at least 4 are needed")

    try:
        driven_path = build_path(positions, ds=ds)
        spline_x, spline_y, knots = fit_spline(positions)
    except GeometryError as e:
        raise TrajectoryTooShortError(f"Episode {traj.name}: driven path cannot be built ({e.message})")

    s_records = ArcLengthTable(spline_x, spline_y, knots).s_at_knots
    usable = np.flatnonzero(s_records + lookahead <= driven_path.length)

    if usable.size == 0:
        raise TrajectoryTooShortError(f"Episode {traj.name} is shorter than the lookahead of {lookahead} m")

    states, actions = [], []

    for index in usable:
        record = traj.records[int(index)]
        preview = preview_point(driven_path, record.state.pose, lookahead)
        states.append((preview.x_ref, preview.y_ref, record.state.vx, record.state.vy, record.state.r))
        actions.append(record.delta_applied)

    key = TaskKey(traj.meta.section_id, traj.meta.v_ref, traj.meta.repetition)
    batch = SampleBatch(np.array(states), np.array(actions))

    return TaskDataset(key=key, batch=batch, train_indices=np.arange(len(batch)), test_indices=np.zeros(0, dtype=int))


def build_curriculum(sections: Sequence[str], velocities: Sequence[float], repetitions: int = 1) -> List[TaskKey]:
    """Repetitions outermost, velocities low to high, sections interleaved innermost."""

    return [TaskKey(section_id, float(v_ref), repetition)
            for repetition in range(repetitions)
            for v_ref in sorted(velocities)
            for section_id in sections]


def split_indices(n: int, train_fraction: float, rng: np.random.Generator):

    order = rng.permutation(n)

    if n < 2:
        return np.sort(order), np.zeros(0, dtype=int)

    n_train = min(max(int(round(train_fraction * n)), 1), n - 1)

    return np.sort(order[:n_train]), np.sort(order[n_train:])


def segment_tasks(episodes: Sequence[Trajectory], curriculum: Optional[Sequence[TaskKey]] = None,
                  seed: int = 0, lookahead: float = DEFAULT_LOOKAHEAD,
                  dev_threshold: float = DEFAULT_FAILURE_DEVIATION,
                  train_fraction: float = DEFAULT_TRAIN_FRACTION, ds: float = DEFAULT_PATH_DS) -> List[TaskDataset]:
    """
    Group the processed samples of the successful episodes into tasks, in curriculum order (sorted keys when
    no curriculum is given). Keys without usable samples are dropped with a warning.
    """

    grouped: Dict[TaskKey, List[SampleBatch]] = {}

    for traj in episodes:

        if episode_failed(traj, dev_threshold):
            logger.warning(f"Episode {traj.name} neglected (failed: {traj.meta.failure_reason or 'deviation'}, "
                           f"max deviation {traj.max_deviation:.3f} m)")
            continue

        try:
            dataset = process_experience(traj, lookahead=lookahead, ds=ds)
        except TrajectoryTooShortError as e:
            logger.warning(f"Episode {traj.name} neglected: {e.message}")
            continue

        grouped.setdefault(dataset.key, []).append(dataset.batch)

    order = list(curriculum) if curriculum is not None else sorted(grouped)
    tasks = []

    for key in order:

        if key not in grouped:
            logger.warning(f"Task group {key.label} is empty and dropped")
            continue

        batch = SampleBatch.concatenate(grouped[key])
        train, test = split_indices(len(batch), train_fraction, derive_rng(seed, COMPONENT_SPLIT, key.label))
        tasks.append(TaskDataset(key=key, batch=batch, train_indices=train, test_indices=test))

    logger.info(f"-> {len(tasks)} tasks segmented")

    return tasks


def save_task_dataset(path: Path, dataset: TaskDataset, task_index: int) -> Path:

    path = Path(path)
    split = np.zeros(len(dataset), dtype=int)
    split[dataset.test_indices] = 1

    rows = (tuple(state) + (action, "test" if is_test else "train")
            for state, action, is_test in zip(dataset.batch.states.tolist(), dataset.batch.actions.tolist(), split))
    write_csv(path, DATASET_COLUMNS, rows)

    save_kv_file(path.with_suffix(".meta"),
                 {"task_index": task_index, "section": dataset.key.section_id, "v_ref": float(dataset.key.v_ref),
                  "repetition": dataset.key.repetition, "n_train": int(dataset.train_indices.size),
                  "n_test": int(dataset.test_indices.size)},
                 header_comments=[f"task {dataset.key.label}"])

    return path


def load_task_dataset(path: Path) -> TaskDataset:

    path = Path(path)
    meta = load_kv_file(path.with_suffix(".meta"))
    rows = read_csv(path)

    if len(rows) == 0:
        raise ExperienceError(f"Dataset {path} is empty")

    states = np.array([[float(row[feature]) for feature in STATE_FEATURES] for row in rows])
    actions = np.array([float(row["a"]) for row in rows])
    is_test = np.array([row["split"] == "test" for row in rows])

    key = TaskKey(str(meta["section"]), float(meta["v_ref"]), int(meta["repetition"]))

    return TaskDataset(key=key, batch=SampleBatch(states, actions), train_indices=np.flatnonzero(~is_test),
                       test_indices=np.flatnonzero(is_test))

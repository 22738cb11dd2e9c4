# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Forgetting and tracking metrics.

EvalMatrix: b[k, j] is the test MSE on task j after learning task k (j <= k), B[k] the mean of row k over the
tasks seen so far. Rows and columns are zero-based here; files and plots count tasks from one.

RolloutReport: deviation, steering and heading statistics of one closed-loop run against its commanded path.

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

import logging
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import List, Sequence

import numpy as np

from src.experience.trajectory import FAILURE_NONE, Trajectory
from src.geometry.path import ReferencePath, project_to_path
from src.policy.network import PolicyNet, mse_loss
from src.policy.normalizer import Normalizer
from src.policy.sample import SampleBatch
from src.tools.csv_io import read_csv, write_csv
from src.tools.custom_errors import HarnessError, MissingTestSetError

logger = logging.getLogger(__name__)

EVAL_MATRIX_COLUMNS = ("metric", "k", "j", "value")
B_CONSISTENCY_TOLERANCE = 1e-12


class EvalMatrix:

    def __init__(self, n_tasks: int):

        if n_tasks < 0:
            raise HarnessError(f"Number of tasks must be non-negative, got {n_tasks}")

        self._b = np.full((n_tasks, n_tasks), np.nan)
        self._B = np.full(n_tasks, np.nan)
        self._rows_filled = 0

    @property
    def n_tasks(self) -> int:
        return int(self._B.size)

    @property
    def rows_filled(self) -> int:
        return self._rows_filled

    @property
    def b(self) -> np.ndarray:
        return self._b.copy()

    @property
    def B(self) -> np.ndarray:
        return self._B.copy()

    def row(self, k: int) -> np.ndarray:
        return self._b[k, :k + 1].copy()

    def set_row(self, k: int, values: Sequence[float]) -> None:
        """Store row k (tasks 0..k) and its mean. Rows are filled strictly in order."""

        if k != self._rows_filled or k >= self.n_tasks:
            raise HarnessError(f"Row {k} cannot be filled, next free row is {self._rows_filled} of {self.n_tasks}")

        values = np.asarray(values, dtype=float)

        if values.size != k + 1:
            raise HarnessError(f"Row {k} needs {k + 1} values, got {values.size}")

        self._b[k, :k + 1] = values
        self._B[k] = float(np.mean(self._b[k, :k + 1]))
        self._rows_filled += 1

    def is_consistent(self, tolerance: float = B_CONSISTENCY_TOLERANCE) -> bool:
        """Filled part lower-triangular, everything else NaN, and every B[k] reproduced from its row."""

        for k in range(self.n_tasks):
            if k < self._rows_filled:
                if np.any(np.isnan(self._b[k, :k + 1])) or not np.all(np.isnan(self._b[k, k + 1:])):
                    return False
                if abs(float(np.mean(self._b[k, :k + 1])) - self._B[k]) > tolerance:
                    return False
            elif not (np.all(np.isnan(self._b[k])) and np.isnan(self._B[k])):
                return False

        return True


def eval_matrix_update(matrix: EvalMatrix, net: PolicyNet, norm: Normalizer, test_sets: Sequence[SampleBatch],
                       k: int = None) -> EvalMatrix:
    """
    Fill row k with the test MSE of the network on the test sets of tasks 0..k.

    :param matrix: Matrix, updated in place.
    :param net: Network after learning task k.
    :param norm: Frozen normalizer.
    :param test_sets: Test sets of (at least) tasks 0..k, in curriculum order.
    :param k: Row to fill, defaults to the next free row.
    :return: The same matrix.

    :raises MissingTestSetError: If a test set of tasks 0..k is absent or empty.
    """

    k = matrix.rows_filled if k is None else k
    missing = [j for j in range(k + 1) if j >= len(test_sets) or test_sets[j] is None or len(test_sets[j]) == 0]

    if len(missing) > 0:
        raise MissingTestSetError(f"No test samples for task(s) {', '.join(str(j + 1) for j in missing)}",
                                  list_missing_tasks=missing)

    matrix.set_row(k, [mse_loss(net, norm, test_sets[j]) for j in range(k + 1)])
    logger.debug(f"Eval matrix row {k + 1}: B = {matrix.B[k]:.6e}")

    return matrix


def save_eval_matrix(path: Path, matrix: EvalMatrix) -> Path:

    rows = []
    for k in range(matrix.rows_filled):
        rows.extend(("b", k + 1, j + 1, value) for j, value in enumerate(matrix.row(k).tolist()))
        rows.append(("B", k + 1, "", float(matrix.B[k])))

    return write_csv(path, EVAL_MATRIX_COLUMNS, rows)


def load_eval_matrix(path: Path) -> EvalMatrix:

    rows = read_csv(path)
    b_rows = [row for row in rows if row["metric"] == "b"]
    n_tasks = max([int(row["k"]) for row in rows], default=0)
    matrix = EvalMatrix(n_tasks)

    for k in range(n_tasks):
        values = sorted(((int(row["j"]), float(row["value"])) for row in b_rows if int(row["k"]) == k + 1))
        matrix.set_row(k, [value for _, value in values])

    return matrix


@dataclass(frozen=True)
class RolloutReport:

    mean_dev: float
    max_dev: float
    mean_abs_delta: float
    smoothness: float               # mean |delta change| per control step [rad]
    completed: bool
    mean_heading_error: float = 0.0
    max_heading_error: float = 0.0
    steps: int = 0
    failure_reason: str = FAILURE_NONE

    def __post_init__(self):
        if not 0.0 <= self.mean_dev <= self.max_dev + 1e-15:
            raise HarnessError(f"Inconsistent deviations: mean {self.mean_dev}, max {self.max_dev}")

    def to_row(self) -> tuple:
        return tuple(asdict(self).values())


ROLLOUT_COLUMNS = tuple(field.name for field in fields(RolloutReport))


def deviation_statistics(positions: np.ndarray, path: ReferencePath):
    """Mean and max absolute lateral deviation of the positions from the path."""

    deviations = np.abs([project_to_path(path, point).e_lat for point in np.asarray(positions, dtype=float)])
    return float(np.mean(deviations)), float(np.max(deviations))


def report_from_trajectory(traj: Trajectory) -> RolloutReport:
    """
    Statistics over all records, the terminal state included. Steering statistics use the applied steering
    of the control steps only.
    """

    deviations = np.abs(traj.lateral_errors)
    heading_errors = np.abs([record.e_psi for record in traj.records])
    heading_errors = heading_errors[np.isfinite(heading_errors)]

    applied = traj.applied_deltas[:-1]
    steering = np.concatenate([[traj.records[0].state.delta], applied]) if applied.size > 0 else np.zeros(0)

    return RolloutReport(
        mean_dev=float(np.mean(deviations)),
        max_dev=float(np.max(deviations)),
        mean_abs_delta=float(np.mean(np.abs(applied))) if applied.size > 0 else 0.0,
        smoothness=float(np.mean(np.abs(np.diff(steering)))) if steering.size > 1 else 0.0,
        completed=not traj.meta.failed,
        mean_heading_error=float(np.mean(heading_errors)) if heading_errors.size > 0 else 0.0,
        max_heading_error=float(np.max(heading_errors)) if heading_errors.size > 0 else 0.0,
        steps=len(traj) - 1,
        failure_reason=traj.meta.failure_reason,
    )


def save_rollout_reports(path: Path, reports: Sequence[RolloutReport], labels: Sequence[tuple],
                         label_columns: Sequence[str]) -> Path:
    """One row per report, prefixed by its label columns (e.g. task index and task name)."""

    if len(labels) != len(reports):
        raise HarnessError(f"{len(labels)} labels for {len(reports)} rollout reports")

    return write_csv(path, tuple(label_columns) + ROLLOUT_COLUMNS,
                     (tuple(label) + report.to_row() for label, report in zip(labels, reports)))


def load_rollout_reports(path: Path) -> List[dict]:
    """Rows of a rollout report file with the report fields converted back to numbers."""

    converted = []

    for row in read_csv(path):
        entry = dict(row)
        for name in ("mean_dev", "max_dev", "mean_abs_delta", "smoothness", "mean_heading_error",
                     "max_heading_error"):
            entry[name] = float(row[name])
        entry["completed"] = row["completed"] == "1"
        entry["steps"] = int(row["steps"])
        converted.append(entry)

    return converted

# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Closed-loop driving episodes and their records. The same runner drives the collection experts, the
baselines and the learned policy: every control period the controller sees the commanded reference path,
its command passes the actuator limits of the plant and the applied steering is recorded next to it.

Episode-level failures (blowup, solver failure, deviation abort) end the episode and are recorded in the
metadata instead of being raised.

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List

import numpy as np

from config.global_constants import (DEFAULT_ABORT_DEVIATION, DEFAULT_LOOKAHEAD, MAX_COLLECTION_VELOCITY,
                                     MIN_COLLECTION_VELOCITY)
from src.experts.controller import Controller
from src.geometry.path import Pose2D, ReferencePath, project_to_path
from src.tools.csv_io import write_csv
from src.tools.custom_errors import (ExperienceError, InvalidParameterError, NumericBlowupError, PathExhaustedError,
                                     QpFailureError)
from src.tools.kv_config import save_kv_file
from src.tools.seeding import COMPONENT_COLLECTION, derive_rng
from src.vehicle.model import SimConfig, VehicleParams, VehicleState, step_dynamic

logger = logging.getLogger(__name__)

EPISODE_COLUMNS = ("t", "x", "y", "psi", "vx", "vy", "r", "delta_cmd", "delta_applied")

FAILURE_NONE = ""
FAILURE_DEVIATION = "deviation"
FAILURE_BLOWUP = "blowup"
FAILURE_QP = "qp_failure"
FAILURE_TIMEOUT = "timeout"
SIMULATOR_FAILURES = (FAILURE_BLOWUP, FAILURE_QP, FAILURE_TIMEOUT)


@dataclass(frozen=True)
class TrajectoryRecord:

    t: float
    state: VehicleState         # state at t, before the command is applied
    delta_cmd: float
    delta_applied: float        # steering the plant received over [t, t + dt]
    e_lat: float                # lateral deviation from the commanded reference path
    s_star: float = float("nan")
    e_psi: float = float("nan")


@dataclass
class EpisodeMeta:

    section_id: str
    v_ref: float
    expert: str
    seed: int
    repetition: int = 0
    failed: bool = False
    failure_reason: str = FAILURE_NONE
    max_deviation: float = 0.0


@dataclass
class Trajectory:
    """Records at a fixed control period. The final record is the terminal state, no command was computed in it."""

    records: List[TrajectoryRecord]
    meta: EpisodeMeta
    dt: float = field(default=0.05)

    def __post_init__(self):

        if len(self.records) == 0:
            raise ExperienceError("A trajectory needs at least one record")

        times = np.array([record.t for record in self.records])

        if np.any(np.diff(times) <= 0.0):
            raise ExperienceError("Trajectory times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.records)

    @property
    def name(self) -> str:
        return f"{self.meta.section_id}_v{self.meta.v_ref:g}_r{self.meta.repetition}_{self.meta.expert}"

    @property
    def positions(self) -> np.ndarray:
        return np.array([(record.state.x, record.state.y) for record in self.records])

    @property
    def times(self) -> np.ndarray:
        return np.array([record.t for record in self.records])

    @property
    def lateral_errors(self) -> np.ndarray:
        return np.array([record.e_lat for record in self.records])

    @property
    def applied_deltas(self) -> np.ndarray:
        return np.array([record.delta_applied for record in self.records])

    @property
    def max_deviation(self) -> float:
        return float(np.max(np.abs(self.lateral_errors)))


def start_pose(path: ReferencePath, lateral_offset: float = 0.0) -> Pose2D:
    """Pose at the path start, aligned with the path, shifted to the left by lateral_offset."""

    psi = float(path.psi[0])
    return Pose2D(float(path.x[0]) - math.sin(psi) * lateral_offset,
                  float(path.y[0]) + math.cos(psi) * lateral_offset,
                  psi)


def run_closed_loop(controller: Controller, path: ReferencePath, v_ref: float, params: VehicleParams,
                    sim_cfg: SimConfig, meta: EpisodeMeta, initial_state: VehicleState,
                    lookahead: float = DEFAULT_LOOKAHEAD,
                    abort_deviation: float = DEFAULT_ABORT_DEVIATION) -> Trajectory:
    """
    Drive the controller along the path at constant reference speed until less than lookahead of the path
    remains or the episode fails.
    """

    # step budget: three times the nominal travel time
    max_steps = int(math.ceil(3.0 * path.length / max(v_ref, 0.5) / sim_cfg.dt)) + 1

    records = []
    state = initial_state

    while True:

        projection = project_to_path(path, state.pose)

        if projection.s_star >= path.length - lookahead:
            break

        if abs(projection.e_lat) > abort_deviation:
            meta.failed, meta.failure_reason = True, FAILURE_DEVIATION
            break

        if len(records) >= max_steps:
            meta.failed, meta.failure_reason = True, FAILURE_TIMEOUT
            break

        try:
            delta_cmd = controller.steer(state, path)
            next_state = step_dynamic(state, delta_cmd, v_ref, params, sim_cfg)
        except NumericBlowupError:
            meta.failed, meta.failure_reason = True, FAILURE_BLOWUP
            break
        except QpFailureError:
            meta.failed, meta.failure_reason = True, FAILURE_QP
            break
        except PathExhaustedError:
            break

        records.append(TrajectoryRecord(t=state.t, state=state, delta_cmd=delta_cmd, delta_applied=next_state.delta,
                                        e_lat=projection.e_lat, s_star=projection.s_star, e_psi=projection.e_psi))
        state = next_state

    terminal = project_to_path(path, state.pose)
    records.append(TrajectoryRecord(t=state.t, state=state, delta_cmd=state.delta, delta_applied=state.delta,
                                    e_lat=terminal.e_lat, s_star=terminal.s_star, e_psi=terminal.e_psi))

    trajectory = Trajectory(records=records, meta=meta, dt=sim_cfg.dt)
    meta.max_deviation = trajectory.max_deviation

    if meta.failed:
        logger.warning(f"Episode {trajectory.name} failed ({meta.failure_reason}) at t = {state.t:.2f} s")

    return trajectory


def collect_episode(expert: Controller, path: ReferencePath, v_ref: float, params: VehicleParams,
                    sim_cfg: SimConfig, seed: int, section_id: str = "", repetition: int = 0,
                    start_offset: float = 0.0, lookahead: float = DEFAULT_LOOKAHEAD,
                    abort_deviation: float = DEFAULT_ABORT_DEVIATION) -> Trajectory:
    """
    Closed-loop episode of an expert at constant reference speed, from a path-aligned start pose. Repetitions
    after the first start with a seeded lateral offset drawn uniformly from [-start_offset, start_offset].

    :raises InvalidParameterError: If v_ref lies outside the collection range [3, 15] m/s.
    """

    if not MIN_COLLECTION_VELOCITY <= v_ref <= MAX_COLLECTION_VELOCITY:
        raise InvalidParameterError(f"Collection speed must lie in [{MIN_COLLECTION_VELOCITY}, "
                                    f"{MAX_COLLECTION_VELOCITY}] m/s, got {v_ref}")

    offset = 0.0
    if repetition > 0 and start_offset > 0:
        rng = derive_rng(seed, COMPONENT_COLLECTION, section_id, f"{v_ref:g}", repetition)
        offset = float(rng.uniform(-start_offset, start_offset))

    meta = EpisodeMeta(section_id=section_id, v_ref=float(v_ref), expert=expert.name, seed=int(seed),
                       repetition=int(repetition))

    return run_closed_loop(expert, path, v_ref, params, sim_cfg, meta,
                           VehicleState.on_pose(start_pose(path, offset), vx=float(v_ref)),
                           lookahead=lookahead, abort_deviation=abort_deviation)


def episode_failed(traj: Trajectory, dev_threshold: float) -> bool:
    """True on a simulator or solver failure, or when the deviation from the reference exceeds dev_threshold."""

    if traj.meta.failure_reason in SIMULATOR_FAILURES:
        return True

    return traj.max_deviation > dev_threshold


def save_trajectory(path: Path, traj: Trajectory) -> Path:

    path = Path(path)
    rows = ((record.t, record.state.x, record.state.y, record.state.psi, record.state.vx, record.state.vy,
             record.state.r, record.delta_cmd, record.delta_applied) for record in traj.records)
    write_csv(path, EPISODE_COLUMNS, rows)

    save_kv_file(path.with_suffix(".meta"), {key: value for key, value in asdict(traj.meta).items()},
                 header_comments=[f"episode {traj.name}"])

    return path

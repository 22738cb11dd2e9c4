# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Closed-loop evaluation of the learned policy and of the expert baselines on a reference path.

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

import logging
from pathlib import Path
from typing import Dict, Iterable, Tuple

import numpy as np

from config.global_constants import DEFAULT_ABORT_DEVIATION, DEFAULT_LOOKAHEAD
from src.experience.trajectory import EpisodeMeta, Trajectory, run_closed_loop, start_pose
from src.experts.controller import Controller
from src.geometry.path import ReferencePath, preview_point
from src.harness.metrics import RolloutReport, report_from_trajectory
from src.policy.network import PolicyNet, forward
from src.policy.normalizer import Normalizer
from src.tools.csv_io import write_csv
from src.vehicle.model import SimConfig, VehicleParams, VehicleState

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ("controller", "t", "s", "e_lat", "psi", "psi_ref", "delta")


class PolicyController(Controller):
    """Learned policy: body-frame preview point plus dynamic status in, steering clamped to the actuator out."""

    def __init__(self, net: PolicyNet, norm: Normalizer, params: VehicleParams, lookahead: float = DEFAULT_LOOKAHEAD,
                 name: str = "policy"):
        self._net = net
        self._norm = norm
        self._params = params
        self._lookahead = lookahead
        self._name = name

    @property
    def name(self) -> str:
        return self._name

    def policy_state(self, state: VehicleState, path: ReferencePath) -> Tuple[float, ...]:
        preview = preview_point(path, state.pose, self._lookahead)
        return (preview.x_ref, preview.y_ref) + state.dynamic_status

    def steer(self, state: VehicleState, path: ReferencePath) -> float:
        delta = forward(self._net, self._norm, self.policy_state(state, path))
        return float(np.clip(delta, -self._params.delta_max, self._params.delta_max))


def rollout_controller(controller: Controller, path: ReferencePath, v_ref: float, params: VehicleParams,
                       sim_cfg: SimConfig, section_id: str = "", lookahead: float = DEFAULT_LOOKAHEAD,
                       abort_deviation: float = DEFAULT_ABORT_DEVIATION) -> Tuple[RolloutReport, Trajectory]:
    """
    Drive the controller from the path-aligned start pose at constant reference speed. Deviations are measured
    against the commanded path; a blowup or a deviation above abort_deviation ends the run with completed=False.
    """

    meta = EpisodeMeta(section_id=section_id, v_ref=float(v_ref), expert=controller.name, seed=0)
    initial_state = VehicleState.on_pose(start_pose(path), vx=float(v_ref))

    traj = run_closed_loop(controller, path, v_ref, params, sim_cfg, meta, initial_state, lookahead=lookahead,
                           abort_deviation=abort_deviation)
    report = report_from_trajectory(traj)

    logger.info(f"-> Rollout {controller.name} on {section_id or 'path'} at {v_ref:g} m/s: "
                f"mean dev {report.mean_dev:.4f} m, max dev {report.max_dev:.4f} m"
                f"{'' if report.completed else f' (aborted: {report.failure_reason})'}")

    return report, traj


def rollout_closed_loop(net: PolicyNet, norm: Normalizer, path: ReferencePath, v_ref: float, params: VehicleParams,
                        sim_cfg: SimConfig, section_id: str = "", lookahead: float = DEFAULT_LOOKAHEAD,
                        name: str = "policy") -> Tuple[RolloutReport, Trajectory]:
    return rollout_controller(PolicyController(net, norm, params, lookahead, name), path, v_ref, params, sim_cfg,
                              section_id=section_id, lookahead=lookahead)


def rollout_baselines(controllers: Iterable[Controller], path: ReferencePath, v_ref: float, params: VehicleParams,
                      sim_cfg: SimConfig, section_id: str = "",
                      lookahead: float = DEFAULT_LOOKAHEAD) -> Dict[str, Tuple[RolloutReport, Trajectory]]:
    return {controller.name: rollout_controller(controller, path, v_ref, params, sim_cfg, section_id=section_id,
                                                lookahead=lookahead)
            for controller in controllers}


def trace_array(traj: Trajectory, path: ReferencePath) -> np.ndarray:
    """Per record: t, s, e_lat, psi, psi_ref, delta (applied)."""
    return np.array([(record.t, record.s_star, record.e_lat, record.state.psi, float(path.heading_at(record.s_star)),
                      record.delta_applied)
                     for record in traj.records])


def save_traces(path: Path, traces: Dict[str, np.ndarray]) -> Path:
    rows = [(name,) + tuple(row) for name, trace in traces.items() for row in trace.tolist()]
    return write_csv(path, TRACE_COLUMNS, rows)

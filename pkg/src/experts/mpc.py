# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Linear MPC on the lateral tracking-error model e = [e_y, de_y, e_psi, de_psi] of the single-track vehicle,
linearized at the current longitudinal speed. The desired yaw rate vx * kappa along the horizon enters as a
known disturbance (curvature feedforward). The model is discretized by zero-order hold and the horizon
condensed into a box-constrained QP over the steering sequence:

    J = sum_k e_k' Q e_k + r_delta * u_k^2 + r_ddelta * (u_k - u_{k-1})^2,   u_{-1} = current steering

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, Tuple

import numpy as np
from scipy.linalg import expm

from config.global_constants import LOW_SPEED_VX, PATH_MPC_CONFIG_SCHEMA
from src.experts.qp import QpProblem, solve_box_qp
from src.geometry.path import ReferencePath, project_to_path
from src.tools.custom_errors import ConfigError
from src.tools.kv_config import load_kv_file, save_kv_file
from src.utils.json_schema_validator import JSONSchemaValidator
from src.vehicle.model import VehicleParams, VehicleState

MPC_KKT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class MpcConfig:

    horizon_steps: int = 20
    dt: float = 0.05
    q_ey: float = 10.0
    q_epsi: float = 5.0
    r_delta: float = 1.0
    r_ddelta: float = 5.0
    delta_bound: float = 0.5

    def __post_init__(self):

        wrong_keys = []

        if int(self.horizon_steps) != self.horizon_steps or self.horizon_steps < 2:
            wrong_keys.append("horizon_steps")
        if not self.dt > 0:
            wrong_keys.append("dt")
        for key in ("q_ey", "q_epsi", "r_delta", "r_ddelta"):
            if not getattr(self, key) >= 0:
                wrong_keys.append(key)
        if not (self.q_ey > 0 or self.q_epsi > 0):
            wrong_keys.append("q_ey/q_epsi")
        if not self.delta_bound > 0:
            wrong_keys.append("delta_bound")

        if len(wrong_keys) > 0:
            raise ConfigError("Invalid MPC configuration", list_wrong_keys=wrong_keys)

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, config_dict: Dict, source: str = "mpc config") -> "MpcConfig":
        JSONSchemaValidator(PATH_MPC_CONFIG_SCHEMA).validate(config_dict, source)
        values = {key: (int(value) if key == "horizon_steps" else float(value)) for key, value in config_dict.items()}
        return cls(**values)


def load_mpc_config(path: Path) -> MpcConfig:
    return MpcConfig.from_dict(load_kv_file(path), source=str(path))


def save_mpc_config(path: Path, cfg: MpcConfig) -> None:
    save_kv_file(path, cfg.to_dict(), header_comments=["error-state MPC configuration"])


def error_model(vx: float, params: VehicleParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Continuous-time lateral error dynamics de/dt = A e + B delta + G (vx * kappa) at speed vx."""

    vx = max(vx, LOW_SPEED_VX)
    m, Iz, lf, lr, Cf, Cr = params.m, params.Iz, params.lf, params.lr, params.Cf, params.Cr

    A = np.array([
        [0.0, 1.0, 0.0, 0.0],
        [0.0, -(Cf + Cr) / (m * vx), (Cf + Cr) / m, (lr * Cr - lf * Cf) / (m * vx)],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, (lr * Cr - lf * Cf) / (Iz * vx), (lf * Cf - lr * Cr) / Iz, -(lf * lf * Cf + lr * lr * Cr) / (Iz * vx)],
    ])
    B = np.array([0.0, Cf / m, 0.0, lf * Cf / Iz])
    G = np.array([0.0, (lr * Cr - lf * Cf) / (m * vx) - vx, 0.0, -(lf * lf * Cf + lr * lr * Cr) / (Iz * vx)])

    return A, B, G


def discretize(A: np.ndarray, B: np.ndarray, G: np.ndarray, dt: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Zero-order hold through the exponential of the augmented system matrix."""

    n = A.shape[0]
    augmented = np.zeros((n + 2, n + 2))
    augmented[:n, :n] = A
    augmented[:n, n] = B
    augmented[:n, n + 1] = G

    phi = expm(augmented * dt)

    return phi[:n, :n], phi[:n, n], phi[:n, n + 1]


def initial_error(state: VehicleState, path: ReferencePath) -> Tuple[np.ndarray, float]:
    """Error state of the vehicle relative to the path and the arc length of its projection."""

    projection = project_to_path(path, state.pose)
    kappa = float(path.curvature_at(projection.s_star))

    e0 = np.array([projection.e_lat,
                   state.vy + state.vx * np.sin(projection.e_psi),
                   projection.e_psi,
                   state.r - state.vx * kappa])

    return e0, projection.s_star


def build_mpc_qp(state: VehicleState, path: ReferencePath, cfg: MpcConfig,
                 params: VehicleParams) -> Tuple[QpProblem, float]:
    """
    Condensed horizon QP for the current state.

    :return: The QpProblem over the steering sequence and the constant cost term, so that
        J(U) = 1/2 U'HU + f'U + constant.
    """

    N = int(cfg.horizon_steps)
    vx = max(state.vx, LOW_SPEED_VX)

    Ad, Bd, Gd = discretize(*error_model(vx, params), cfg.dt)
    e0, s_star = initial_error(state, path)

    s_horizon = s_star + vx * cfg.dt * np.arange(N)
    desired_yaw_rate = vx * path.curvature_at(s_horizon)

    # e_{k+1} = Ad e_k + Bd u_k + Gd w_k  ->  E = Phi e0 + Gamma U + c
    Phi = np.zeros((4 * N, 4))
    Gamma = np.zeros((4 * N, N))
    c = np.zeros(4 * N)

    power = np.eye(4)
    free_response = np.zeros(4)
    propagated_input = np.zeros((4, N))

    for k in range(N):
        power = Ad @ power
        free_response = Ad @ free_response + Gd * desired_yaw_rate[k]
        propagated_input = Ad @ propagated_input
        propagated_input[:, k] = Bd

        Phi[4 * k:4 * k + 4] = power
        Gamma[4 * k:4 * k + 4] = propagated_input
        c[4 * k:4 * k + 4] = free_response

    Q_bar = np.kron(np.eye(N), np.diag([cfg.q_ey, 0.0, cfg.q_epsi, 0.0]))

    D = np.eye(N) - np.eye(N, k=-1)
    d0 = np.zeros(N)
    d0[0] = state.delta

    offset = Phi @ e0 + c

    H = 2.0 * (Gamma.T @ Q_bar @ Gamma + cfg.r_delta * np.eye(N) + cfg.r_ddelta * D.T @ D)
    f = 2.0 * (Gamma.T @ Q_bar @ offset - cfg.r_ddelta * D.T @ d0)
    constant = float(offset @ Q_bar @ offset + cfg.r_ddelta * d0 @ d0)

    bound = np.full(N, cfg.delta_bound)

    return QpProblem(H=H, f=f, lower=-bound, upper=bound), constant


def mpc_control(state: VehicleState, path: ReferencePath, cfg: MpcConfig, params: VehicleParams) -> float:
    """
    First steering command of the MPC solution.

    :raises QpFailureError: If the QP solver does not converge.
    """

    problem, _ = build_mpc_qp(state, path, cfg, params)
    solution = solve_box_qp(problem, tol=MPC_KKT_TOLERANCE)

    return float(solution[0])

# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Single-track (bicycle) vehicle model with linear tires and 3 DOF (vx, vy, yaw rate), integrated with RK4,
plus the kinematic bicycle model used as test oracle.

Steering commands pass a rate limiter and a saturation once per control period; the applied angle is then
held over all RK4 substeps. The longitudinal speed follows vx_ref with a first-order lag.

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Dict, Iterable, List, Tuple

from config.global_constants import (BLOWUP_MAGNITUDE, DEFAULT_CONTROL_DT, DEFAULT_SUBSTEPS, DEFAULT_VX_LAG_TAU,
                                     LOW_SPEED_VX, MAX_VX_REF, PATH_VEHICLE_PARAMS_SCHEMA)
from src.geometry.path import Pose2D
from src.tools.custom_errors import InvalidParameterError, NumericBlowupError
from src.tools.kv_config import load_kv_file, save_kv_file
from src.utils.json_schema_validator import JSONSchemaValidator


@dataclass(frozen=True)
class VehicleParams:
    """Mid-size sedan by default."""

    m: float = 1500.0               # [kg]
    Iz: float = 2500.0              # [kg m^2]
    lf: float = 1.2                 # CoG to front axle [m]
    lr: float = 1.4                 # CoG to rear axle [m]
    Cf: float = 80000.0             # front cornering stiffness [N/rad]
    Cr: float = 80000.0             # rear cornering stiffness [N/rad]
    delta_max: float = 0.5          # [rad]
    delta_rate_max: float = 1.0     # [rad/s]

    def __post_init__(self):

        wrong_keys = [key for key, value in asdict(self).items() if not (math.isfinite(value) and value > 0)]

        if len(wrong_keys) > 0:
            raise InvalidParameterError(f"Vehicle parameters must be positive and finite: {', '.join(wrong_keys)}")

        if self.delta_max > math.pi / 4:
            raise InvalidParameterError(f"delta_max must not exceed pi/4, got {self.delta_max}")

    @property
    def L(self) -> float:
        return self.lf + self.lr

    @property
    def understeer_gradient(self) -> float:
        """K in r_ss = vx * delta / (L + K * vx^2) [s^2/m]."""
        return self.m / self.L * (self.lr / self.Cf - self.lf / self.Cr)

    def steady_state_yaw_rate(self, vx: float, delta: float) -> float:
        return vx * delta / (self.L + self.understeer_gradient * vx * vx)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)

    @classmethod
    def from_dict(cls, config_dict: Dict, source: str = "vehicle params") -> "VehicleParams":
        JSONSchemaValidator(PATH_VEHICLE_PARAMS_SCHEMA).validate(config_dict, source)
        return cls(**{key: float(value) for key, value in config_dict.items()})


def load_vehicle_params(path: Path) -> VehicleParams:
    return VehicleParams.from_dict(load_kv_file(path), source=str(path))


def save_vehicle_params(path: Path, params: VehicleParams) -> None:
    save_kv_file(path, params.to_dict(), header_comments=["single-track vehicle parameters"])


@dataclass(frozen=True)
class SimConfig:

    dt: float = DEFAULT_CONTROL_DT
    substeps: int = DEFAULT_SUBSTEPS
    vx_lag_tau: float = DEFAULT_VX_LAG_TAU

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidParameterError(f"Control period must be positive, got {self.dt}")
        if int(self.substeps) != self.substeps or self.substeps < 1:
            raise InvalidParameterError(f"Substeps must be an integer >= 1, got {self.substeps}")
        if not self.vx_lag_tau > 0:
            raise InvalidParameterError(f"Longitudinal lag must be positive, got {self.vx_lag_tau}")


@dataclass(frozen=True)
class VehicleState:

    x: float = 0.0
    y: float = 0.0
    psi: float = 0.0        # unwrapped, see pose for the normalized heading
    vx: float = 0.0
    vy: float = 0.0
    r: float = 0.0
    delta: float = 0.0
    t: float = 0.0

    @property
    def pose(self) -> Pose2D:
        return Pose2D(self.x, self.y, self.psi)

    @property
    def dynamic_status(self) -> Tuple[float, float, float]:
        return self.vx, self.vy, self.r

    def is_valid(self, params: VehicleParams) -> bool:
        values = (self.x, self.y, self.psi, self.vx, self.vy, self.r, self.delta, self.t)
        return (all(math.isfinite(value) for value in values) and self.vx >= 0.0
                and abs(self.delta) <= params.delta_max)

    @classmethod
    def on_pose(cls, pose: Pose2D, vx: float) -> "VehicleState":
        return cls(x=pose.x, y=pose.y, psi=pose.psi, vx=vx)


def low_speed_guard(state: VehicleState) -> VehicleState:
    """State with vx raised to the regularization speed for the slip-angle denominators."""

    if state.vx >= LOW_SPEED_VX:
        return state

    return replace(state, vx=LOW_SPEED_VX)


def slip_angles(state: VehicleState, params: VehicleParams) -> Tuple[float, float]:

    guarded = low_speed_guard(state)

    alpha_f = state.delta - math.atan2(state.vy + params.lf * state.r, guarded.vx)
    alpha_r = -math.atan2(state.vy - params.lr * state.r, guarded.vx)

    return alpha_f, alpha_r


def rate_limit(delta: float, delta_cmd: float, params: VehicleParams, dt: float) -> float:
    """Rate limiter followed by saturation."""

    max_change = params.delta_rate_max * dt
    limited = min(max(delta_cmd, delta - max_change), delta + max_change)

    return min(max(limited, -params.delta_max), params.delta_max)


def _derivatives(z: Tuple[float, ...], delta: float, vx_ref: float, params: VehicleParams,
                 tau: float) -> Tuple[float, ...]:

    _, _, psi, vx, vy, r = z
    vx_slip = max(vx, LOW_SPEED_VX)

    alpha_f = delta - math.atan2(vy + params.lf * r, vx_slip)
    alpha_r = -math.atan2(vy - params.lr * r, vx_slip)

    force_front = params.Cf * alpha_f * math.cos(delta)
    force_rear = params.Cr * alpha_r

    cos_psi, sin_psi = math.cos(psi), math.sin(psi)

    return (vx * cos_psi - vy * sin_psi,
            vx * sin_psi + vy * cos_psi,
            r,
            (vx_ref - vx) / tau,
            (force_front + force_rear) / params.m - vx * r,
            (params.lf * force_front - params.lr * force_rear) / params.Iz)


def _rk4_step(z: Tuple[float, ...], h: float, delta: float, vx_ref: float, params: VehicleParams,
              tau: float) -> Tuple[float, ...]:

    k1 = _derivatives(z, delta, vx_ref, params, tau)
    k2 = _derivatives(tuple(zi + 0.5 * h * ki for zi, ki in zip(z, k1)), delta, vx_ref, params, tau)
    k3 = _derivatives(tuple(zi + 0.5 * h * ki for zi, ki in zip(z, k2)), delta, vx_ref, params, tau)
    k4 = _derivatives(tuple(zi + h * ki for zi, ki in zip(z, k3)), delta, vx_ref, params, tau)

    return tuple(zi + h / 6.0 * (a + 2.0 * b + 2.0 * c + d) for zi, a, b, c, d in zip(z, k1, k2, k3, k4))


def step_dynamic(state: VehicleState, delta_cmd: float, vx_ref: float, params: VehicleParams,
                 cfg: SimConfig) -> VehicleState:
    """
    Advance the single-track model by one control period.

    :param state: Current state.
    :param delta_cmd: Commanded steering angle [rad], rate limited and saturated before it is applied.
    :param vx_ref: Reference longitudinal speed [m/s], in [0, 40].
    :param params: Vehicle parameters.
    :param cfg: Control period, RK4 substeps and longitudinal lag.
    :return: State after cfg.dt, its delta is the applied steering angle.

    :raises InvalidParameterError: vx_ref outside [0, 40] m/s or a non-finite command.
    :raises NumericBlowupError: A state magnitude exceeds 1e6 or turns non-finite.
    """

    if not 0.0 <= vx_ref <= MAX_VX_REF:
        raise InvalidParameterError(f"vx_ref must lie in [0, {MAX_VX_REF}] m/s, got {vx_ref}")

    if not math.isfinite(delta_cmd):
        raise InvalidParameterError(f"Steering command must be finite, got {delta_cmd}")

    delta = rate_limit(state.delta, delta_cmd, params, cfg.dt)

    h = cfg.dt / cfg.substeps
    z = (state.x, state.y, state.psi, state.vx, state.vy, state.r)

    for _ in range(int(cfg.substeps)):
        z = _rk4_step(z, h, delta, vx_ref, params, cfg.vx_lag_tau)

    if not all(math.isfinite(value) and abs(value) <= BLOWUP_MAGNITUDE for value in z):
        raise NumericBlowupError(f"Vehicle state diverged at t = {state.t + cfg.dt:.3f} s")

    x, y, psi, vx, vy, r = z

    return VehicleState(x=x, y=y, psi=psi, vx=max(vx, 0.0), vy=vy, r=r, delta=delta, t=state.t + cfg.dt)


def step_kinematic(state: VehicleState, delta: float, v: float, dt: float,
                   params: VehicleParams = VehicleParams()) -> VehicleState:
    """Kinematic bicycle (rear-axle reference), psi_dot = v * tan(delta) / L, integrated exactly along the arc."""

    if v == 0.0:
        return replace(state, t=state.t + dt)

    return _kinematic_arc(state, delta, v, dt, params.L)


def _kinematic_arc(state: VehicleState, delta: float, v: float, dt: float, wheelbase: float) -> VehicleState:

    tan_delta = math.tan(delta)
    yaw_rate = v * tan_delta / wheelbase
    dpsi = yaw_rate * dt

    if abs(tan_delta) < 1e-12:
        x = state.x + v * dt * math.cos(state.psi)
        y = state.y + v * dt * math.sin(state.psi)
    else:
        radius = wheelbase / tan_delta
        x = state.x + radius * (math.sin(state.psi + dpsi) - math.sin(state.psi))
        y = state.y - radius * (math.cos(state.psi + dpsi) - math.cos(state.psi))

    return VehicleState(x=x, y=y, psi=state.psi + dpsi, vx=v, vy=0.0, r=yaw_rate, delta=delta, t=state.t + dt)


def simulate_open_loop(state: VehicleState, delta_cmds: Iterable[float], vx_ref: float, params: VehicleParams,
                       cfg: SimConfig) -> List[VehicleState]:
    """States after each command, starting state included."""

    states = [state]

    for delta_cmd in delta_cmds:
        states.append(step_dynamic(states[-1], delta_cmd, vx_ref, params, cfg))

    return states

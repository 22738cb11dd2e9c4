# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Common steering-controller interface, so that one closed-loop runner serves data collection, the baseline
rollouts and the rollouts of the learned policy.

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

from abc import ABC, abstractmethod
from enum import Enum

from config.global_constants import DEFAULT_LOOKAHEAD
from src.experts.mpc import MpcConfig, mpc_control
from src.experts.pure_pursuit import pure_pursuit
from src.geometry.path import ReferencePath
from src.tools.custom_errors import ConfigError
from src.vehicle.model import VehicleParams, VehicleState


class ExpertKind(Enum):
    PP = "pp"
    MPC = "mpc"

    @classmethod
    def from_str(cls, name: str):
        for kind in list(cls):
            if kind.value == name.lower() or kind.name == name.upper():
                return kind
        raise ConfigError(f"Unknown expert '{name}', expected one of: {', '.join(kind.value for kind in cls)}",
                          list_wrong_keys=["expert"])


class Controller(ABC):

    @property
    @abstractmethod
    def name(self) -> str:
        pass

    @abstractmethod
    def steer(self, state: VehicleState, path: ReferencePath) -> float:
        """Steering command [rad] for the state. May raise PathExhaustedError or QpFailureError."""
        pass


class PurePursuitController(Controller):

    def __init__(self, params: VehicleParams, lookahead: float = DEFAULT_LOOKAHEAD):
        self._params = params
        self._lookahead = lookahead

    @property
    def name(self) -> str:
        return ExpertKind.PP.value

    def steer(self, state: VehicleState, path: ReferencePath) -> float:
        return pure_pursuit(state, path, self._lookahead, self._params)


class MpcController(Controller):

    def __init__(self, params: VehicleParams, cfg: MpcConfig = MpcConfig()):
        self._params = params
        self._cfg = cfg

    @property
    def name(self) -> str:
        return ExpertKind.MPC.value

    @property
    def cfg(self) -> MpcConfig:
        return self._cfg

    def steer(self, state: VehicleState, path: ReferencePath) -> float:
        return mpc_control(state, path, self._cfg, self._params)


def make_expert(kind: ExpertKind, params: VehicleParams, mpc_cfg: MpcConfig = MpcConfig(),
                lookahead: float = DEFAULT_LOOKAHEAD) -> Controller:

    if kind == ExpertKind.PP:
        return PurePursuitController(params, lookahead)

    return MpcController(params, mpc_cfg)

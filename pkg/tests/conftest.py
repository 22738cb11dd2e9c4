# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Shared fixtures: small reference paths, vehicle and simulation settings, small networks.

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

import math

import numpy as np
import pytest

from src.geometry.path import ReferencePath, build_path
from src.policy.network import PolicyNet
from src.policy.sample import SampleBatch
from src.vehicle.model import SimConfig, VehicleParams

SMALL_DIMS = (5, 8, 8, 1)


def arc_waypoints(radius: float, angle: float, step_deg: float = 5.0):
    """Counter-clockwise circular arc starting at the origin heading along +x."""

    n = int(round(math.degrees(angle) / step_deg))
    thetas = np.linspace(0.0, angle, n + 1)
    return [(radius * math.sin(theta), radius * (1.0 - math.cos(theta))) for theta in thetas]


@pytest.fixture
def params() -> VehicleParams:
    return VehicleParams()


@pytest.fixture
def sim_cfg() -> SimConfig:
    return SimConfig()


@pytest.fixture
def straight_path() -> ReferencePath:
    return build_path([(x, 0.0) for x in range(0, 101, 10)], ds=0.1)


@pytest.fixture
def long_straight_path() -> ReferencePath:
    return build_path([(x, 0.0) for x in range(0, 201, 10)], ds=0.1)


@pytest.fixture
def arc_path() -> ReferencePath:
    """Quarter circle of radius 30 m."""
    return build_path(arc_waypoints(30.0, math.pi / 2), ds=0.1)


@pytest.fixture
def wavy_path() -> ReferencePath:
    """Gentle S-shaped road, 120 m."""
    return build_path([(x, 3.0 * math.sin(x / 15.0)) for x in range(0, 121, 5)], ds=0.1)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def small_net(rng) -> PolicyNet:
    return PolicyNet.initialize(rng, SMALL_DIMS)


def random_batch(rng: np.random.Generator, n: int) -> SampleBatch:
    """States around typical driving values, actions from a smooth function of the preview offset."""

    states = np.column_stack([rng.uniform(1.5, 2.5, n),
                              rng.uniform(-0.5, 0.5, n),
                              rng.uniform(3.0, 15.0, n),
                              rng.normal(0.0, 0.1, n),
                              rng.normal(0.0, 0.2, n)])
    actions = 0.3 * np.tanh(states[:, 1]) + 0.01 * states[:, 4]
    return SampleBatch(states, actions)

# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Geometric pure pursuit: steer along the circular arc through the preview point.

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

import math

from src.geometry.path import PreviewPoint, ReferencePath, preview_point
from src.vehicle.model import VehicleParams, VehicleState


def pure_pursuit_steering(preview: PreviewPoint, lookahead: float, params: VehicleParams) -> float:

    alpha = math.atan2(preview.y_ref, preview.x_ref)
    delta = math.atan(2.0 * params.L * math.sin(alpha) / lookahead)

    return min(max(delta, -params.delta_max), params.delta_max)


def pure_pursuit(state: VehicleState, path: ReferencePath, lookahead: float, params: VehicleParams) -> float:
    """
    :raises PathExhaustedError: If the vehicle already projects onto the path end.
    """

    return pure_pursuit_steering(preview_point(path, state.pose, lookahead), lookahead, params)

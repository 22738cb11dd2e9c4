# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Averaged gradient episodic memory projection. The update g on the current task must not point against the
reference gradient g_ref of the memory batch (g'g_ref >= 0); a conflicting g is replaced by its projection

    g~ = g - (g'g_ref / g_ref'g_ref) g_ref

which is the closest vector to g satisfying the constraint.

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

from typing import Tuple, Union

import numpy as np

from config.global_constants import PROJECTION_SLACK, PROJECTION_ZERO_NORM
from src.policy.network import GradientVector
from src.tools.custom_errors import LengthMismatchError

GradientLike = Union[GradientVector, np.ndarray]


def _values(g: GradientLike) -> np.ndarray:
    return g.values if isinstance(g, GradientVector) else np.asarray(g, dtype=float).reshape(-1)


def project_gradient(g: np.ndarray, g_ref: np.ndarray) -> Tuple[np.ndarray, bool]:
    """
    :return: The (possibly) projected gradient and whether the projection branch was taken. An unprojected g
        is returned as the same object.

    :raises LengthMismatchError: If the vectors differ in length.
    """

    if g.shape != g_ref.shape:
        raise LengthMismatchError(f"Gradient lengths differ: {g.size} != {g_ref.size}")

    dot_product = float(g @ g_ref)
    reference_magnitude = float(g_ref @ g_ref)

    if reference_magnitude < PROJECTION_ZERO_NORM or dot_product >= 0.0:
        return g, False

    return g - (dot_product / reference_magnitude) * g_ref, True


def agem_project(g: GradientLike, g_ref: GradientLike) -> GradientLike:
    """Projected gradient, of the same type as g."""

    projected, _ = project_gradient(_values(g), _values(g_ref))

    if isinstance(g, GradientVector):
        return g if projected is g.values else GradientVector(projected)

    return projected


def constraint_margin(g_tilde: GradientLike, g_ref: GradientLike) -> float:
    """g~'g_ref / (||g~|| ||g_ref||), or +inf when either vector vanishes."""

    g_tilde, g_ref = _values(g_tilde), _values(g_ref)
    scale = float(np.linalg.norm(g_tilde) * np.linalg.norm(g_ref))

    if scale == 0.0:
        return float("inf")

    return float(g_tilde @ g_ref) / scale


def satisfies_constraint(g_tilde: GradientLike, g_ref: GradientLike, slack: float = PROJECTION_SLACK) -> bool:
    return constraint_margin(g_tilde, g_ref) >= -slack

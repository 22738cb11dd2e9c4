# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Reference paths: natural cubic spline through waypoints (chord-length parametrized), re-parametrized
to arc length and resampled at a uniform spacing ds. Queries: projection of a point onto the path
(signed lateral error, positive to the left of the tangent) and the preview point in the vehicle body
frame.

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import CubicSpline

from config.global_constants import ARC_LENGTH_TOLERANCE, DEFAULT_PATH_DS
from src.tools.csv_io import read_csv_array, write_csv
from src.tools.custom_errors import (CurvatureLimitError, DegenerateSegmentError, GeometryError,
                                     PathExhaustedError, TooFewWaypointsError)

MIN_WAYPOINTS = 4
COINCIDENT_DISTANCE = 1e-12
END_OF_PATH_TOLERANCE = 1e-9


def wrap_angle(angle: float) -> float:
    """Normalize an angle to (-pi, pi]."""

    wrapped = math.remainder(angle, 2.0 * math.pi)

    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi

    return wrapped


@dataclass(frozen=True)
class Waypoint:

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise GeometryError(f"Waypoint coordinates must be finite, got ({self.x}, {self.y})")


@dataclass(frozen=True)
class Pose2D:

    x: float
    y: float
    psi: float

    def __post_init__(self):
        object.__setattr__(self, "psi", wrap_angle(float(self.psi)))


class PreviewPoint(NamedTuple):
    """Preview point in the vehicle body frame (x forward, y left)."""

    x_ref: float
    y_ref: float

    def to_global(self, pose: Pose2D) -> Tuple[float, float]:
        cos_psi, sin_psi = math.cos(pose.psi), math.sin(pose.psi)
        return (pose.x + cos_psi * self.x_ref - sin_psi * self.y_ref,
                pose.y + sin_psi * self.x_ref + cos_psi * self.y_ref)


class PathProjection(NamedTuple):

    s_star: float
    e_lat: float
    e_psi: float        # nan unless a pose was supplied
    segment_index: int


@dataclass(frozen=True, eq=False)
class ReferencePath:

    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    psi: np.ndarray
    kappa: np.ndarray
    ds: float
    kappa_max: float
    _xy: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):

        arrays = [np.array(values, dtype=float) for values in (self.x, self.y, self.s, self.psi, self.kappa)]
        lengths = {len(values) for values in arrays}

        if len(lengths) != 1:
            raise GeometryError("ReferencePath arrays must have equal lengths")

        if arrays[0].size < 2:
            raise GeometryError("ReferencePath needs at least two points")

        for name, values in zip(("x", "y", "s", "psi", "kappa"), arrays):
            values.flags.writeable = False
            object.__setattr__(self, name, values)

        xy = np.column_stack([self.x, self.y])
        xy.flags.writeable = False
        object.__setattr__(self, "_xy", xy)

    @property
    def n_points(self) -> int:
        return int(self.s.size)

    @property
    def length(self) -> float:
        return float(self.s[-1])

    @property
    def xy(self) -> np.ndarray:
        return self._xy

    def points(self) -> List[Tuple[float, float, float, float, float]]:
        return list(zip(self.x.tolist(), self.y.tolist(), self.s.tolist(), self.psi.tolist(), self.kappa.tolist()))

    def position_at(self, s_query: float) -> Tuple[float, float]:
        s_query = min(max(s_query, 0.0), self.length)
        return float(np.interp(s_query, self.s, self.x)), float(np.interp(s_query, self.s, self.y))

    def heading_at(self, s_query: Union[float, np.ndarray]):
        return np.interp(np.clip(s_query, 0.0, self.length), self.s, self.psi)

    def curvature_at(self, s_query: Union[float, np.ndarray]):
        return np.interp(np.clip(s_query, 0.0, self.length), self.s, self.kappa)


class ArcLengthTable:
    """
    Arc length of a chord-length parametrized planar spline, integrated with composite Simpson on a grid of
    sub-intervals per knot interval. The grid is refined until two successive resolutions agree within the
    arc-length tolerance.
    """

    def __init__(self, spline_x: CubicSpline, spline_y: CubicSpline, knots: np.ndarray,
                 tolerance: float = ARC_LENGTH_TOLERANCE):

        self.spline_x = spline_x
        self.spline_y = spline_y
        self.knots = knots

        subdivisions = 8
        t_grid, s_grid = self._integrate(subdivisions)

        while subdivisions < 256:
            t_fine, s_fine = self._integrate(2 * subdivisions)
            error = abs(s_fine[-1] - s_grid[-1])
            subdivisions *= 2
            t_grid, s_grid = t_fine, s_fine
            if error <= tolerance:
                break

        self.subdivisions = subdivisions
        self.t_grid = t_grid
        self.s_grid = s_grid

    def speed(self, t: np.ndarray) -> np.ndarray:
        return np.hypot(self.spline_x(t, 1), self.spline_y(t, 1))

    def _simpson(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return (b - a) / 6.0 * (self.speed(a) + 4.0 * self.speed(0.5 * (a + b)) + self.speed(b))

    def _integrate(self, subdivisions: int) -> Tuple[np.ndarray, np.ndarray]:

        fractions = np.arange(subdivisions) / subdivisions
        widths = np.diff(self.knots)
        t_grid = np.append((self.knots[:-1, None] + widths[:, None] * fractions).ravel(), self.knots[-1])
        s_grid = np.concatenate(([0.0], np.cumsum(self._simpson(t_grid[:-1], t_grid[1:]))))

        return t_grid, s_grid

    @property
    def total(self) -> float:
        return float(self.s_grid[-1])

    @property
    def s_at_knots(self) -> np.ndarray:
        return self.s_grid[::self.subdivisions]

    def arc_length(self, t: np.ndarray) -> np.ndarray:
        index = np.clip(np.searchsorted(self.t_grid, t, side="right") - 1, 0, self.t_grid.size - 2)
        return self.s_grid[index] + self._simpson(self.t_grid[index], t)

    def parameter_at(self, s_target: np.ndarray, newton_iterations: int = 4) -> np.ndarray:
        """Invert s(t) by interpolation on the grid followed by Newton steps."""

        s_target = np.asarray(s_target, dtype=float)
        t = np.interp(s_target, self.s_grid, self.t_grid)

        for _ in range(newton_iterations):
            residual = self.arc_length(t) - s_target
            t = np.clip(t - residual / np.maximum(self.speed(t), 1e-12), self.knots[0], self.knots[-1])

        return t


def _as_xy_array(waypoints: Sequence) -> np.ndarray:

    rows = []

    for waypoint in waypoints:
        if isinstance(waypoint, Waypoint):
            rows.append((waypoint.x, waypoint.y))
        else:
            rows.append((float(waypoint[0]), float(waypoint[1])))

    return np.array(rows, dtype=float).reshape(-1, 2)


def fit_spline(waypoints: Sequence) -> Tuple[CubicSpline, CubicSpline, np.ndarray]:
    """
    Natural cubic spline through the waypoints, parametrized by cumulative chord length.

    :raises TooFewWaypointsError: Less than four waypoints.
    :raises DegenerateSegmentError: Two consecutive waypoints coincide.
    """

    xy = _as_xy_array(waypoints)

    if xy.shape[0] < MIN_WAYPOINTS:
        raise TooFewWaypointsError(f"At least {MIN_WAYPOINTS} waypoints are required, got {xy.shape[0]}")

    if not np.all(np.isfinite(xy)):
        raise GeometryError("Waypoints must have finite coordinates")

    chords = np.hypot(np.diff(xy[:, 0]), np.diff(xy[:, 1]))
    duplicates = np.flatnonzero(chords <= COINCIDENT_DISTANCE)

    if duplicates.size > 0:
        raise DegenerateSegmentError("Consecutive waypoints coincide",
                                     list_duplicate_indices=[int(index) for index in duplicates])

    knots = np.concatenate(([0.0], np.cumsum(chords)))

    return (CubicSpline(knots, xy[:, 0], bc_type="natural"),
            CubicSpline(knots, xy[:, 1], bc_type="natural"),
            knots)


def build_path(waypoints: Sequence, ds: float = DEFAULT_PATH_DS, kappa_max: Optional[float] = None) -> ReferencePath:
    """
    Build a reference path through the waypoints, resampled at uniform arc-length spacing.

    :param waypoints: Waypoint objects or (x, y) pairs, at least four, no consecutive duplicates.
    :param ds: Resample spacing [m].
    :param kappa_max: Declared curvature bound [1/m]; the largest sampled |kappa| when None.
    :return: The ReferencePath.

    :raises TooFewWaypointsError: Less than four waypoints.
    :raises DegenerateSegmentError: Two consecutive waypoints coincide.
    :raises CurvatureLimitError: The sampled curvature exceeds the declared bound.
    """

    if not ds > 0:
        raise GeometryError(f"Resample spacing must be positive, got {ds}")

    spline_x, spline_y, knots = fit_spline(waypoints)
    table = ArcLengthTable(spline_x, spline_y, knots)

    n_intervals = int(math.floor(table.total / ds + 1e-9))

    if n_intervals < 1:
        raise GeometryError(f"Path of length {table.total:.6f} m is shorter than ds = {ds} m")

    s = np.arange(n_intervals + 1) * ds
    t = table.parameter_at(s)

    dx, dy = spline_x(t, 1), spline_y(t, 1)
    ddx, ddy = spline_x(t, 2), spline_y(t, 2)

    psi = np.unwrap(np.arctan2(dy, dx))
    kappa = (dx * ddy - dy * ddx) / np.power(dx * dx + dy * dy, 1.5)

    largest_kappa = float(np.max(np.abs(kappa)))

    if kappa_max is None:
        kappa_max = largest_kappa
    elif largest_kappa > kappa_max + 1e-12:
        raise CurvatureLimitError(f"Path curvature {largest_kappa:.6f} 1/m exceeds declared bound {kappa_max} 1/m")

    return ReferencePath(x=spline_x(t), y=spline_y(t), s=s, psi=psi, kappa=kappa, ds=float(ds),
                         kappa_max=float(kappa_max))


def project_to_path(path: ReferencePath, p: Union[Tuple[float, float], Pose2D],
                    pose: Optional[Pose2D] = None) -> PathProjection:
    """
    Project a point onto the path: nearest sample, refined on the two adjacent segments by linear
    interpolation. Clamps to the path endpoints. Passing a Pose2D (as p or pose) also yields the heading error.
    """

    if isinstance(p, Pose2D):
        pose = p
        px, py = p.x, p.y
    else:
        px, py = float(p[0]), float(p[1])

    d2 = (path.x - px) ** 2 + (path.y - py) ** 2
    nearest = int(np.argmin(d2))

    best = None

    for j in (nearest - 1, nearest):

        if j < 0 or j >= path.n_points - 1:
            continue

        ax, ay = path.x[j], path.y[j]
        vx, vy = path.x[j + 1] - ax, path.y[j + 1] - ay
        segment_sq = vx * vx + vy * vy

        fraction = ((px - ax) * vx + (py - ay) * vy) / segment_sq
        fraction = min(max(fraction, 0.0), 1.0)

        qx, qy = ax + fraction * vx, ay + fraction * vy
        distance_sq = (px - qx) ** 2 + (py - qy) ** 2

        if best is None or distance_sq < best[0]:
            best = (distance_sq, j, fraction, vx, vy, segment_sq, ax, ay)

    _, j, fraction, vx, vy, segment_sq, ax, ay = best

    s_star = float(path.s[j] + fraction * (path.s[j + 1] - path.s[j]))
    e_lat = float((vx * (py - ay) - vy * (px - ax)) / math.sqrt(segment_sq))

    e_psi = float("nan")
    if pose is not None:
        e_psi = wrap_angle(pose.psi - float(path.heading_at(s_star)))

    return PathProjection(s_star=s_star, e_lat=e_lat, e_psi=e_psi, segment_index=j)


def to_body_frame(pose: Pose2D, gx: float, gy: float) -> PreviewPoint:

    dx, dy = gx - pose.x, gy - pose.y
    cos_psi, sin_psi = math.cos(pose.psi), math.sin(pose.psi)

    return PreviewPoint(x_ref=cos_psi * dx + sin_psi * dy, y_ref=-sin_psi * dx + cos_psi * dy)


def preview_point(path: ReferencePath, pose: Pose2D, lookahead: float) -> PreviewPoint:
    """
    Point at arc length s_star(pose) + lookahead, expressed in the body frame of the pose. Clamps to the
    path end.

    :raises PathExhaustedError: The pose already projects onto the final sample.
    """

    if not lookahead > 0:
        raise GeometryError(f"Lookahead must be positive, got {lookahead}")

    projection = project_to_path(path, (pose.x, pose.y))

    if projection.s_star >= path.length - END_OF_PATH_TOLERANCE:
        raise PathExhaustedError(f"Pose projects onto the end of the path (s = {projection.s_star:.3f} m)")

    gx, gy = path.position_at(projection.s_star + lookahead)

    return to_body_frame(pose, gx, gy)


def save_waypoints_csv(path: Path, waypoints: Sequence[Waypoint]) -> Path:
    return write_csv(path, ["x", "y"], ((waypoint.x, waypoint.y) for waypoint in waypoints))


def load_waypoints_csv(path: Path) -> List[Waypoint]:
    return [Waypoint(float(x), float(y)) for x, y in read_csv_array(path, ["x", "y"])]

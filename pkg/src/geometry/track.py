# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Procedural road sections. A TrackSpec holds a piecewise-constant curvature profile; generate_track blends
the segments with short linear ramps, applies a seeded smooth multiplicative perturbation, integrates
heading and position and emits waypoints at a fixed spacing.

Three presets mirror the road sections of the experiment: S1 (test section, richest curvature), S2 and
S3 (training sections, gentler).

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid
from shapely.geometry import LineString

from config.global_constants import (DEFAULT_KAPPA_MAX, DEFAULT_PATH_DS, DEFAULT_WAYPOINT_SPACING,
                                     PATH_TRACK_SPEC_SCHEMA)
from src.geometry.path import ReferencePath, Waypoint, build_path
from src.tools.custom_errors import ConfigError, InvalidSpecError
from src.tools.kv_config import load_kv_file, save_kv_file
from src.utils.json_schema_validator import JSONSchemaValidator

logger = logging.getLogger(__name__)

INTEGRATION_STEP = 0.25         # [m]
TRANSITION_LENGTH = 5.0         # curvature ramp between segments [m]
PERTURBATION_WAVELENGTHS = (40.0, 120.0)


@dataclass(frozen=True)
class TrackSpec:

    seed: int
    length: float
    curvature_profile: Tuple[Tuple[float, float], ...]
    section_id: str
    kappa_max: float = DEFAULT_KAPPA_MAX
    perturbation: float = 0.0                   # relative amplitude of the smooth curvature perturbation
    waypoint_spacing: float = DEFAULT_WAYPOINT_SPACING

    def validate(self) -> None:
        """
        :raises InvalidSpecError: On a non-positive length or spacing, an empty profile, a non-positive
            segment length or a target curvature beyond kappa_max.
        """

        problems = []

        if not (math.isfinite(self.length) and self.length > 0):
            problems.append(f"length must be positive, got {self.length}")

        if not self.kappa_max > 0:
            problems.append(f"kappa_max must be positive, got {self.kappa_max}")

        if not self.waypoint_spacing > 0:
            problems.append(f"waypoint_spacing must be positive, got {self.waypoint_spacing}")

        if not 0.0 <= self.perturbation < 1.0:
            problems.append(f"perturbation must lie in [0, 1), got {self.perturbation}")

        if len(self.curvature_profile) == 0:
            problems.append("curvature_profile is empty")

        for index, (segment_length, kappa) in enumerate(self.curvature_profile):
            if not segment_length > 0:
                problems.append(f"segment {index}: length must be positive, got {segment_length}")
            if abs(kappa) > self.kappa_max:
                problems.append(f"segment {index}: |kappa| = {abs(kappa)} exceeds kappa_max = {self.kappa_max}")

        if len(problems) > 0:
            raise InvalidSpecError(f"Invalid track spec '{self.section_id}': " + "; ".join(problems))

    @property
    def profile_max_curvature(self) -> float:
        return max(abs(kappa) for _, kappa in self.curvature_profile)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "section_id": self.section_id,
            "seed": self.seed,
            "length": float(self.length),
            "kappa_max": float(self.kappa_max),
            "perturbation": float(self.perturbation),
            "waypoint_spacing": float(self.waypoint_spacing),
            "curvature_profile": [f"{float(length):g}:{float(kappa):g}" for length, kappa in self.curvature_profile],
        }

    @classmethod
    def from_dict(cls, config_dict: Dict[str, Any], source: str = "track spec") -> "TrackSpec":

        JSONSchemaValidator(PATH_TRACK_SPEC_SCHEMA).validate(config_dict, source)

        profile_tokens = config_dict["curvature_profile"]
        if isinstance(profile_tokens, str):
            profile_tokens = [profile_tokens]

        profile = []
        for token in profile_tokens:
            try:
                length, kappa = token.split(":")
                profile.append((float(length), float(kappa)))
            except ValueError:
                raise ConfigError(f"{source}: curvature segment '{token}' is not 'length:kappa'",
                                  list_wrong_keys=["curvature_profile"])

        spec = cls(seed=int(config_dict["seed"]),
                   length=float(config_dict["length"]),
                   curvature_profile=tuple(profile),
                   section_id=str(config_dict["section_id"]),
                   kappa_max=float(config_dict.get("kappa_max", DEFAULT_KAPPA_MAX)),
                   perturbation=float(config_dict.get("perturbation", 0.0)),
                   waypoint_spacing=float(config_dict.get("waypoint_spacing", DEFAULT_WAYPOINT_SPACING)))
        spec.validate()

        return spec


def save_track_spec(path: Path, spec: TrackSpec) -> None:
    save_kv_file(path, spec.to_dict(), header_comments=[f"track section {spec.section_id}"])


def load_track_spec(path: Path) -> TrackSpec:
    return TrackSpec.from_dict(load_kv_file(path), source=str(path))


def _profile_knots(spec: TrackSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Knots of the piecewise-linear curvature profile: constant segments joined by linear ramps."""

    lengths = [length for length, _ in spec.curvature_profile]
    kappas = [kappa for _, kappa in spec.curvature_profile]

    profile_length = sum(lengths)
    if profile_length < spec.length:
        # Beyond the profile the road runs straight
        lengths.append(spec.length - profile_length)
        kappas.append(0.0)

    half_ramp = min(0.5 * TRANSITION_LENGTH, 0.25 * min(lengths))

    knots_s = [0.0]
    knots_kappa = [kappas[0]]
    boundary = 0.0

    for index in range(1, len(lengths)):
        boundary += lengths[index - 1]
        knots_s.extend([boundary - half_ramp, boundary + half_ramp])
        knots_kappa.extend([kappas[index - 1], kappas[index]])

    knots_s.append(max(sum(lengths), spec.length))
    knots_kappa.append(kappas[-1])

    return np.array(knots_s), np.array(knots_kappa)


def _perturbation(spec: TrackSpec, s: np.ndarray) -> np.ndarray:
    """Sum of three seeded sinusoids, scaled to a peak magnitude of at most one."""

    rng = np.random.default_rng(spec.seed)
    wavelengths = rng.uniform(*PERTURBATION_WAVELENGTHS, size=3)
    phases = rng.uniform(0.0, 2.0 * math.pi, size=3)
    amplitudes = rng.uniform(0.5, 1.0, size=3)

    wave = sum(amplitude * np.sin(2.0 * math.pi * s / wavelength + phase)
               for amplitude, wavelength, phase in zip(amplitudes, wavelengths, phases))

    return wave / float(np.sum(amplitudes))


def curvature_along_track(spec: TrackSpec, s: np.ndarray) -> np.ndarray:
    """Target curvature of the generated road at arc lengths s (before waypoint interpolation)."""

    knots_s, knots_kappa = _profile_knots(spec)
    kappa = np.interp(s, knots_s, knots_kappa)

    if spec.perturbation > 0:
        kappa = kappa * (1.0 + spec.perturbation * _perturbation(spec, s))

    return np.clip(kappa, -spec.kappa_max, spec.kappa_max)


def generate_track(spec: TrackSpec) -> List[Waypoint]:
    """
    Generate the waypoints of a road section. Deterministic for a given spec (including its seed).

    :param spec: Track specification.
    :return: At least four waypoints, spaced about spec.waypoint_spacing apart along the road.

    :raises InvalidSpecError: If the spec is invalid.
    """

    spec.validate()

    n_steps = max(int(math.ceil(spec.length / INTEGRATION_STEP)), 1)
    s = np.linspace(0.0, spec.length, n_steps + 1)

    kappa = curvature_along_track(spec, s)
    heading = cumulative_trapezoid(kappa, s, initial=0.0)
    x = cumulative_trapezoid(np.cos(heading), s, initial=0.0)
    y = cumulative_trapezoid(np.sin(heading), s, initial=0.0)

    n_waypoints = max(int(round(spec.length / spec.waypoint_spacing)), 3) + 1
    s_waypoints = np.linspace(0.0, spec.length, n_waypoints)
    x_waypoints = np.interp(s_waypoints, s, x)
    y_waypoints = np.interp(s_waypoints, s, y)

    if not LineString(np.column_stack([x_waypoints, y_waypoints])).is_simple:
        logger.warning(f"Generated track '{spec.section_id}' intersects itself")

    return [Waypoint(float(xw), float(yw)) for xw, yw in zip(x_waypoints, y_waypoints)]


def build_track_path(spec: TrackSpec, ds: float = DEFAULT_PATH_DS) -> ReferencePath:
    return build_path(generate_track(spec), ds=ds)


# S1 is the richest section (most and shortest bends). S2 spans its curvature range in both directions
# with fewer, longer bends; S3 stays gentler than S1.
PRESET_SPECS: Dict[str, TrackSpec] = {
    "S1": TrackSpec(seed=11, length=300.0, section_id="S1", perturbation=0.1,
                    curvature_profile=((30.0, 0.0), (35.0, 0.035), (30.0, -0.045), (30.0, 0.05),
                                       (35.0, -0.04), (25.0, 0.045), (35.0, -0.035), (80.0, 0.0))),
    "S2": TrackSpec(seed=12, length=300.0, section_id="S2", perturbation=0.1,
                    curvature_profile=((30.0, 0.0), (40.0, 0.035), (30.0, -0.06), (25.0, 0.0), (35.0, 0.065),
                                       (40.0, -0.045), (35.0, 0.03), (65.0, 0.0))),
    "S3": TrackSpec(seed=13, length=300.0, section_id="S3", perturbation=0.1,
                    curvature_profile=((30.0, 0.0), (40.0, -0.03), (35.0, 0.04), (40.0, -0.035), (35.0, 0.04),
                                       (120.0, 0.0))),
}


def preset_spec(section_id: str) -> TrackSpec:

    if section_id not in PRESET_SPECS:
        raise InvalidSpecError(f"Unknown track preset '{section_id}', known: {', '.join(PRESET_SPECS)}")

    return PRESET_SPECS[section_id]

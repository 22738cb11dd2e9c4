# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Custom errors raised by the path-tracking workbench.

Last modification: 18.10.2026
"""

__version__ = "2"
__author__ = "lifetrack developers"

from typing import List


class LifetrackError(Exception):
    def __init__(self, message: str = ""):
        self.message = message
        super().__init__(self.message)


# Configuration
class ConfigError(LifetrackError):
    def __init__(self, message: str = "", list_wrong_keys: List[str] = None):

        if list_wrong_keys is None:
            list_wrong_keys = []

        self.list_wrong_keys = list_wrong_keys

        super().__init__(message)


class UsageError(LifetrackError):
    pass


# Geometry
class GeometryError(LifetrackError):
    pass


class TooFewWaypointsError(GeometryError):
    pass


class DegenerateSegmentError(GeometryError):
    def __init__(self, message: str = "", list_duplicate_indices: List[int] = None):

        if list_duplicate_indices is None:
            list_duplicate_indices = []

        self.list_duplicate_indices = list_duplicate_indices

        super().__init__(message)


class CurvatureLimitError(GeometryError):
    pass


class PathExhaustedError(GeometryError):
    pass


class InvalidSpecError(GeometryError):
    pass


# Vehicle
class VehicleError(LifetrackError):
    pass


class InvalidParameterError(VehicleError):
    pass


class NumericBlowupError(VehicleError):
    pass


# Experts
class QpFailureError(LifetrackError):
    def __init__(self, message: str = "", kkt_residual: float = float("nan")):
        self.kkt_residual = kkt_residual
        super().__init__(message)


# Policy
class PolicyError(LifetrackError):
    pass


class EmptyBatchError(PolicyError):
    pass


class LengthMismatchError(PolicyError):
    pass


class EmptyDataError(PolicyError):
    pass


class ModelFileError(PolicyError):
    pass


# Continual learning
class EpisodicMemoryError(LifetrackError):
    pass


class EmptyMemoryError(EpisodicMemoryError):
    pass


class UnknownEvalIdError(EpisodicMemoryError):
    pass


class ProjectionError(EpisodicMemoryError):
    pass


# Experience
class ExperienceError(LifetrackError):
    pass


class TrajectoryTooShortError(ExperienceError):
    pass


# Harness
class HarnessError(LifetrackError):
    pass


class MissingTestSetError(HarnessError):
    def __init__(self, message: str = "", list_missing_tasks: List[int] = None):

        if list_missing_tasks is None:
            list_missing_tasks = []

        self.list_missing_tasks = list_missing_tasks

        super().__init__(message)


class IllegalStageTransitionError(HarnessError):
    pass

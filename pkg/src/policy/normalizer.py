# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Per-feature input normalization, fitted once on the curriculum data and frozen afterwards so that memory
similarities and stored gradients stay comparable over the whole task sequence.

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

import logging
from dataclasses import dataclass
from typing import Protocol, Sequence, Union

import numpy as np

from config.global_constants import NORMALIZER_SCALE_FLOOR
from src.policy.sample import STATE_DIM
from src.tools.custom_errors import EmptyDataError, PolicyError

logger = logging.getLogger(__name__)


class StateSource(Protocol):

    @property
    def train_states(self) -> np.ndarray:
        ...


@dataclass(frozen=True, eq=False)
class Normalizer:

    shift: np.ndarray
    scale: np.ndarray

    def __post_init__(self):

        shift = np.array(self.shift, dtype=float).reshape(-1)
        scale = np.array(self.scale, dtype=float).reshape(-1)

        if shift.size != STATE_DIM or scale.size != STATE_DIM:
            raise PolicyError(f"Normalizer needs {STATE_DIM} shifts and scales")

        if np.any(scale < NORMALIZER_SCALE_FLOOR) or not np.all(np.isfinite(scale)):
            raise PolicyError(f"Normalizer scales must be finite and >= {NORMALIZER_SCALE_FLOOR}")

        shift.flags.writeable = False
        scale.flags.writeable = False
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "scale", scale)

    @classmethod
    def identity(cls) -> "Normalizer":
        return cls(np.zeros(STATE_DIM), np.ones(STATE_DIM))

    def apply(self, states: np.ndarray) -> np.ndarray:
        return (np.asarray(states, dtype=float) - self.shift) / self.scale


def fit_normalizer(datasets: Sequence[Union[np.ndarray, StateSource]]) -> Normalizer:
    """
    Per-feature mean and (population) standard deviation over all provided states. Constant features get
    the scale floor.

    :param datasets: State arrays of shape (n, 5) or task datasets (their training states are used).
    :raises EmptyDataError: If no state is provided.
    """

    blocks = []

    for dataset in datasets:
        states = dataset if isinstance(dataset, np.ndarray) else dataset.train_states
        states = np.asarray(states, dtype=float).reshape(-1, STATE_DIM)
        if states.shape[0] > 0:
            blocks.append(states)

    if len(blocks) == 0:
        raise EmptyDataError("Cannot fit a normalizer without data")

    states = np.vstack(blocks)
    shift = states.mean(axis=0)
    scale = np.maximum(states.std(axis=0), NORMALIZER_SCALE_FLOOR)

    logger.info(f"-> Normalizer fitted on {states.shape[0]} states")

    return Normalizer(shift, scale)

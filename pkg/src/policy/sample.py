# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Experience samples. The policy state is s = [x_ref, y_ref, vx, vy, r]: preview point in the body frame plus
the dynamic status of the vehicle; the action is the applied steering angle.

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from src.tools.custom_errors import PolicyError

STATE_FEATURES = ("x_ref", "y_ref", "vx", "vy", "r")
STATE_DIM = len(STATE_FEATURES)


@dataclass(frozen=True)
class Sample:

    s: tuple
    a: float

    def __post_init__(self):

        state = tuple(float(value) for value in self.s)

        if len(state) != STATE_DIM:
            raise PolicyError(f"Sample state must have {STATE_DIM} features, got {len(state)}")

        if not (all(math.isfinite(value) for value in state) and math.isfinite(self.a)):
            raise PolicyError("Sample values must be finite")

        object.__setattr__(self, "s", state)
        object.__setattr__(self, "a", float(self.a))


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """Array form of a list of samples: states (n, 5), actions (n,)."""

    states: np.ndarray
    actions: np.ndarray

    def __post_init__(self):

        states = np.asarray(self.states, dtype=float).reshape(-1, STATE_DIM)
        actions = np.asarray(self.actions, dtype=float).reshape(-1)

        if states.shape[0] != actions.shape[0]:
            raise PolicyError(f"{states.shape[0]} states but {actions.shape[0]} actions")

        object.__setattr__(self, "states", states)
        object.__setattr__(self, "actions", actions)

    def __len__(self) -> int:
        return int(self.actions.size)

    def subset(self, indices: Union[Sequence[int], np.ndarray]) -> "SampleBatch":
        indices = np.asarray(indices, dtype=int)
        return SampleBatch(self.states[indices], self.actions[indices])

    def samples(self) -> list:
        return [Sample(tuple(state), action) for state, action in zip(self.states.tolist(), self.actions.tolist())]

    @classmethod
    def from_samples(cls, samples: Iterable[Sample]) -> "SampleBatch":
        samples = list(samples)
        if len(samples) == 0:
            return cls.empty()
        return cls(np.array([sample.s for sample in samples]), np.array([sample.a for sample in samples]))

    @classmethod
    def empty(cls) -> "SampleBatch":
        return cls(np.zeros((0, STATE_DIM)), np.zeros(0))

    @classmethod
    def concatenate(cls, batches: Sequence["SampleBatch"]) -> "SampleBatch":
        batches = [batch for batch in batches if len(batch) > 0]
        if len(batches) == 0:
            return cls.empty()
        return cls(np.vstack([batch.states for batch in batches]), np.concatenate([batch.actions for batch in batches]))


def as_batch(batch: Union[SampleBatch, Sequence[Sample]]) -> SampleBatch:
    if isinstance(batch, SampleBatch):
        return batch
    return SampleBatch.from_samples(batch)

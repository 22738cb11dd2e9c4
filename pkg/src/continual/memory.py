# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Episodic memory of (state, action) samples from earlier tasks.

Curated mode keeps the stored states spread out: two stored states always lie further apart than the
similarity threshold eta (squared distance in normalized state space). A candidate with stored neighbors
within eta competes with them on an evaluation function (lower is better, ties go to the stored sample);
only the winner of the neighborhood survives.

Reservoir mode stores a uniform random subset of every task.

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, List, Sequence

import numpy as np

from config.global_constants import DEFAULT_ETA, DEFAULT_RESERVOIR_PER_TASK
from src.policy.normalizer import Normalizer
from src.policy.sample import STATE_DIM, STATE_FEATURES, Sample, SampleBatch
from src.tools.csv_io import read_csv_array, write_csv
from src.tools.custom_errors import ConfigError, EmptyMemoryError, UnknownEvalIdError
from src.tools.kv_config import load_kv_file, save_kv_file

logger = logging.getLogger(__name__)

_EVAL_FUNCTIONS: Dict[str, Callable[[Sequence[float], float], float]] = {
    "steer_effort": lambda s, a: a * a,
    "abs_steer": lambda s, a: abs(a),
    "lateral_accel": lambda s, a: (s[2] * s[4]) ** 2,
}

EVAL_IDS = tuple(_EVAL_FUNCTIONS)


def eval_fn(s: Sequence[float], a: float, eval_id: str = "steer_effort") -> float:
    """
    Score of a stored sample, lower is better. steer_effort: a^2, abs_steer: |a|, lateral_accel: (vx * r)^2.

    :raises UnknownEvalIdError: If eval_id is not registered.
    """

    if eval_id not in _EVAL_FUNCTIONS:
        raise UnknownEvalIdError(f"Unknown eval id '{eval_id}', known: {', '.join(EVAL_IDS)}")

    return float(_EVAL_FUNCTIONS[eval_id](s, float(a)))


def sim(s_a: Sequence[float], s_b: Sequence[float]) -> float:
    """Squared Euclidean distance of two normalized states."""

    difference = np.asarray(s_a, dtype=float) - np.asarray(s_b, dtype=float)
    return float(difference @ difference)


class MemoryMode(Enum):
    CURATED = "curated"
    RESERVOIR = "reservoir"

    @classmethod
    def from_str(cls, name: str):
        for mode in list(cls):
            if mode.value == name.lower():
                return mode
        raise ConfigError(f"Unknown memory mode '{name}'", list_wrong_keys=["mode"])


@dataclass
class CurationReport:

    candidates: int = 0
    inserted: int = 0
    replaced: int = 0       # candidate won against its stored neighbors
    rejected: int = 0       # a stored neighbor won
    removed: int = 0        # stored samples dropped from memory


def _read_only(values: np.ndarray) -> np.ndarray:
    view = values.view()
    view.flags.writeable = False
    return view


class EpisodicMemory:

    def __init__(self, normalizer: Normalizer, eta: float = DEFAULT_ETA, eval_id: str = "steer_effort",
                 mode: MemoryMode = MemoryMode.CURATED, reservoir_per_task: int = DEFAULT_RESERVOIR_PER_TASK):

        if eval_id not in _EVAL_FUNCTIONS:
            raise UnknownEvalIdError(f"Unknown eval id '{eval_id}', known: {', '.join(EVAL_IDS)}")

        if not eta >= 0:
            raise ConfigError(f"Similarity threshold must be non-negative, got {eta}", list_wrong_keys=["eta"])

        if int(reservoir_per_task) < 1:
            raise ConfigError("reservoir_per_task must be >= 1", list_wrong_keys=["reservoir_per_task"])

        self._normalizer = normalizer
        self._eta = float(eta)
        self._eval_id = eval_id
        self._mode = mode
        self._reservoir_per_task = int(reservoir_per_task)

        self._states = np.zeros((0, STATE_DIM))
        self._normalized = np.zeros((0, STATE_DIM))
        self._actions = np.zeros(0)
        self._scores = np.zeros(0)
        self._task_ids = np.zeros(0, dtype=int)

    def __len__(self) -> int:
        return int(self._actions.size)

    @property
    def size(self) -> int:
        return len(self)

    @property
    def eta(self) -> float:
        return self._eta

    @property
    def eval_id(self) -> str:
        return self._eval_id

    @property
    def mode(self) -> MemoryMode:
        return self._mode

    @property
    def reservoir_per_task(self) -> int:
        return self._reservoir_per_task

    @property
    def normalizer(self) -> Normalizer:
        return self._normalizer

    @property
    def task_ids(self) -> np.ndarray:
        return self._task_ids.copy()

    @property
    def states(self) -> np.ndarray:
        """Read-only view on the stored raw states."""
        return _read_only(self._states)

    @property
    def normalized_states(self) -> np.ndarray:
        return _read_only(self._normalized)

    @property
    def actions(self) -> np.ndarray:
        return _read_only(self._actions)

    @property
    def scores(self) -> np.ndarray:
        """eval_fn of every stored sample."""
        return _read_only(self._scores)

    def as_batch(self) -> SampleBatch:
        return SampleBatch(self._states.copy(), self._actions.copy())

    def entries(self) -> List[tuple]:
        """(task id, Sample) pairs in storage order."""
        return [(int(task_id), Sample(tuple(state), action))
                for task_id, state, action in zip(self._task_ids, self._states.tolist(), self._actions.tolist())]

    def count_per_task(self) -> Dict[int, int]:
        task_ids, counts = np.unique(self._task_ids, return_counts=True)
        return {int(task_id): int(count) for task_id, count in zip(task_ids, counts)}

    def append(self, task_id: int, states: np.ndarray, actions: np.ndarray) -> None:

        states = np.asarray(states, dtype=float).reshape(-1, STATE_DIM)
        actions = np.asarray(actions, dtype=float).reshape(-1)
        scores = np.array([eval_fn(state, action, self._eval_id) for state, action in zip(states, actions)])

        self._states = np.vstack([self._states, states])
        self._normalized = np.vstack([self._normalized, self._normalizer.apply(states)])
        self._actions = np.concatenate([self._actions, actions])
        self._scores = np.concatenate([self._scores, scores])
        self._task_ids = np.concatenate([self._task_ids, np.full(actions.size, int(task_id), dtype=int)])

    def remove(self, indices: np.ndarray) -> None:
        """Drop the entries at the given storage positions; the others keep their order."""
        keep = np.ones(len(self), dtype=bool)
        keep[indices] = False
        self._states = self._states[keep]
        self._normalized = self._normalized[keep]
        self._actions = self._actions[keep]
        self._scores = self._scores[keep]
        self._task_ids = self._task_ids[keep]

    def min_pairwise_sim(self) -> float:
        """Smallest squared distance between two stored normalized states (inf below two entries)."""

        if len(self) < 2:
            return float("inf")

        squared_norms = np.sum(self._normalized ** 2, axis=1)
        distances = squared_norms[:, None] + squared_norms[None, :] - 2.0 * self._normalized @ self._normalized.T
        np.fill_diagonal(distances, np.inf)

        return float(np.min(distances))


def memory_update_curated(memory: EpisodicMemory, batch: SampleBatch, task_id: int) -> CurationReport:
    """
    Offer every sample of the batch to the curated memory, in batch order.

    A candidate without stored neighbor within eta is inserted. Otherwise the neighborhood (candidate plus
    stored neighbors) keeps only its best-scoring member, ties going to the stored sample with the earliest
    storage position.
    """

    if memory.mode != MemoryMode.CURATED:
        raise ConfigError("Curated update on a memory in reservoir mode", list_wrong_keys=["mode"])

    report = CurationReport()
    normalized = memory.normalizer.apply(batch.states)

    for index in range(len(batch)):

        report.candidates += 1
        state, action = batch.states[index], batch.actions[index]

        if len(memory) > 0:
            difference = memory.normalized_states - normalized[index]
            neighbors = np.flatnonzero(np.einsum("ij,ij->i", difference, difference) <= memory.eta)
        else:
            neighbors = np.zeros(0, dtype=int)

        if neighbors.size == 0:
            memory.append(task_id, state[None, :], action)
            report.inserted += 1
            continue

        candidate_score = eval_fn(state, action, memory.eval_id)
        neighbor_scores = memory.scores[neighbors]
        best = int(np.argmin(neighbor_scores))

        if candidate_score < neighbor_scores[best]:
            memory.remove(neighbors)
            memory.append(task_id, state[None, :], action)
            report.replaced += 1
            report.removed += int(neighbors.size)
        else:
            losers = np.delete(neighbors, best)
            if losers.size > 0:
                memory.remove(losers)
            report.rejected += 1
            report.removed += int(losers.size)

    logger.debug(f"Curated memory update task {task_id}: {report}")

    return report


def memory_update_reservoir(memory: EpisodicMemory, batch: SampleBatch, task_id: int,
                            rng: np.random.Generator) -> int:
    """
    Append a uniform random subset of at most reservoir_per_task samples under the task id.

    :return: Number of stored samples.
    """

    if memory.mode != MemoryMode.RESERVOIR:
        raise ConfigError("Reservoir update on a memory in curated mode", list_wrong_keys=["mode"])

    n = len(batch)

    if n <= memory.reservoir_per_task:
        selected = np.arange(n)
    else:
        selected = np.sort(rng.choice(n, size=memory.reservoir_per_task, replace=False))

    memory.append(task_id, batch.states[selected], batch.actions[selected])

    return int(selected.size)


def sample_memory_batch(memory: EpisodicMemory, n: int, rng: np.random.Generator) -> SampleBatch:
    """
    n stored samples. Without replacement when the memory holds more than n samples; otherwise every stored
    sample once plus uniform draws with replacement for the remainder.

    :raises EmptyMemoryError: If the memory is empty.
    """

    size = len(memory)

    if size == 0:
        raise EmptyMemoryError("Cannot sample from an empty episodic memory")

    if n < size:
        indices = rng.choice(size, size=n, replace=False)
    else:
        indices = np.concatenate([rng.permutation(size), rng.integers(0, size, size=n - size)])

    return SampleBatch(memory.states[indices], memory.actions[indices])


def save_memory(csv_path: Path, config_path: Path, memory: EpisodicMemory) -> None:

    write_csv(csv_path, ("task_id",) + STATE_FEATURES + ("a",),
              ((int(task_id),) + tuple(state) + (action,)
               for task_id, state, action in zip(memory.task_ids, memory.states.tolist(), memory.actions.tolist())))

    save_kv_file(config_path, {"eta": memory.eta, "eval_id": memory.eval_id, "mode": memory.mode.value,
                               "reservoir_per_task": memory.reservoir_per_task},
                 header_comments=["episodic memory snapshot"])


def load_memory(csv_path: Path, config_path: Path, normalizer: Normalizer) -> EpisodicMemory:

    config_dict = load_kv_file(config_path)
    memory = EpisodicMemory(normalizer, eta=float(config_dict["eta"]), eval_id=str(config_dict["eval_id"]),
                            mode=MemoryMode.from_str(str(config_dict["mode"])),
                            reservoir_per_task=int(config_dict["reservoir_per_task"]))

    rows = read_csv_array(csv_path, ("task_id",) + STATE_FEATURES + ("a",))

    for row in rows:
        memory.append(int(row[0]), row[1:1 + STATE_DIM][None, :], row[-1])

    return memory

# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Sequential task training for the three learning methods. The lifelong methods constrain every minibatch
step with the gradient of the memory (the whole memory while it fits into one memory batch, a fresh sample
afterwards). The optimizer increment is projected again, and a step that would lift the loss on the whole
memory above its pre-task value plus a small slack is halved or skipped. After each task the memory is
refreshed: curated (ll_me) or reservoir (ll_no_me).

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from config.global_constants import (DEFAULT_BATCH_SIZE, DEFAULT_EPOCHS, DEFAULT_ETA, DEFAULT_LEARNING_RATE,
                                     DEFAULT_MEMORY_BATCH_SIZE, DEFAULT_RESERVOIR_PER_TASK,
                                     MAX_STEP_HALVINGS, MEMORY_LOSS_FLOOR, MEMORY_LOSS_SLACK, PROJECTION_SLACK,
                                     PROJECTION_ZERO_NORM)
from src.continual.agem import constraint_margin, project_gradient
from src.continual.memory import (EpisodicMemory, MemoryMode, memory_update_curated, memory_update_reservoir,
                                  sample_memory_batch)
from src.continual.method_enum import LearningMethod
from src.policy.network import PolicyNet, backward, mse_loss
from src.policy.normalizer import Normalizer
from src.policy.optimizer import OptimizerMethod, OptimizerState, apply_gradient, optimizer_update
from src.policy.sample import SampleBatch
from src.tools.custom_errors import ConfigError, EmptyBatchError, EmptyMemoryError, ProjectionError
from src.tools.progress import SilentWorker
from src.tools.seeding import COMPONENT_INIT, COMPONENT_MEMORY, COMPONENT_SHUFFLE, derive_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainerConfig:

    method: LearningMethod = LearningMethod.LL_ME
    epochs: int = DEFAULT_EPOCHS
    batch_size: int = DEFAULT_BATCH_SIZE
    memory_batch_size: int = DEFAULT_MEMORY_BATCH_SIZE
    optimizer: OptimizerMethod = OptimizerMethod.ADAM
    learning_rate: float = DEFAULT_LEARNING_RATE
    seed: int = 0
    eta: float = DEFAULT_ETA
    eval_id: str = "steer_effort"
    reservoir_per_task: int = DEFAULT_RESERVOIR_PER_TASK

    def __post_init__(self):

        wrong_keys = [key for key in ("epochs", "batch_size") if getattr(self, key) < 1]

        if self.method.uses_memory and self.memory_batch_size < 1:
            wrong_keys.append("memory_batch_size")

        if not self.learning_rate > 0:
            wrong_keys.append("learning_rate")

        if len(wrong_keys) > 0:
            raise ConfigError("Invalid trainer configuration", list_wrong_keys=wrong_keys)


@dataclass
class TrainTaskStats:

    task_id: int
    method: str
    epoch_losses: List[float] = field(default_factory=list)
    total_steps: int = 0
    projected_steps: int = 0
    halved_steps: int = 0        # increments shortened to keep the memory loss within budget
    rejected_steps: int = 0
    memory_size: int = 0
    memory_loss_before: float = float("nan")    # loss on the constraint memory before the task
    memory_loss_after: float = float("nan")     # same memory, after the task
    min_constraint_margin: float = float("nan")

    @property
    def final_loss(self) -> float:
        return self.epoch_losses[-1] if len(self.epoch_losses) > 0 else float("nan")


def create_memory(cfg: TrainerConfig, norm: Normalizer) -> Optional[EpisodicMemory]:

    if cfg.method == LearningMethod.LL_ME:
        return EpisodicMemory(norm, eta=cfg.eta, eval_id=cfg.eval_id, mode=MemoryMode.CURATED,
                              reservoir_per_task=cfg.reservoir_per_task)

    if cfg.method == LearningMethod.LL_NO_ME:
        return EpisodicMemory(norm, eta=cfg.eta, eval_id=cfg.eval_id, mode=MemoryMode.RESERVOIR,
                              reservoir_per_task=cfg.reservoir_per_task)

    return None


def _bounded_step(net: PolicyNet, norm: Normalizer, memory_batch: SampleBatch, increment: np.ndarray,
                  budget: float) -> float:
    """
    Apply the largest of increment, increment/2, increment/4, ... that keeps the memory loss within budget.

    :return: Applied scale, 0 if every candidate exceeded the budget and the parameters were left unchanged.
    """

    params = np.array(net.params)
    scale = 1.0

    for _ in range(MAX_STEP_HALVINGS + 1):
        net.set_params(params + scale * increment)
        if mse_loss(net, norm, memory_batch) <= budget:
            return scale
        scale *= 0.5

    net.set_params(params)
    return 0.0


def train_task(net: PolicyNet, norm: Normalizer, opt: OptimizerState, memory: Optional[EpisodicMemory],
               batch: SampleBatch, cfg: TrainerConfig, task_id: int, worker=SilentWorker()) -> TrainTaskStats:
    """
    Train one task and refresh the memory afterwards.

    :param net: Network, updated in place.
    :param norm: Frozen normalizer.
    :param opt: Optimizer state, updated in place.
    :param memory: Episodic memory of the lifelong methods, None for non_ll.
    :param batch: Training samples of the task.
    :param cfg: Trainer configuration.
    :param task_id: Position of the task in the curriculum; keys the shuffle and memory generators.
    :param worker: Progress worker, advanced once per epoch.
    :return: Training statistics.

    :raises EmptyBatchError: If the task has no training samples.
    :raises ProjectionError: If a projected step violates the memory constraint.
    """

    n = len(batch)

    if n == 0:
        raise EmptyBatchError(f"Task {task_id} has no training samples")

    if cfg.method.uses_memory and memory is None:
        raise EmptyMemoryError(f"Method {cfg.method.value} needs an episodic memory")

    shuffle_rng = derive_rng(cfg.seed, COMPONENT_SHUFFLE, task_id)
    memory_rng = derive_rng(cfg.seed, COMPONENT_MEMORY, task_id)

    constrained = cfg.method.uses_memory and len(memory) > 0
    memory_batch = memory.as_batch() if constrained else None

    stats = TrainTaskStats(task_id=task_id, method=cfg.method.value)
    margins = []

    if constrained:
        stats.memory_loss_before = mse_loss(net, norm, memory_batch)
        budget = stats.memory_loss_before * (1.0 + MEMORY_LOSS_SLACK) + MEMORY_LOSS_FLOOR

    for epoch in range(cfg.epochs):

        order = shuffle_rng.permutation(n)

        for start in range(0, n, cfg.batch_size):

            _, gradient = backward(net, norm, batch.subset(order[start:start + cfg.batch_size]))
            stats.total_steps += 1

            if not constrained:
                apply_gradient(net, opt, gradient)
                continue

            # The whole memory serves as reference while it fits into one memory batch
            if len(memory) <= cfg.memory_batch_size:
                reference_batch = memory_batch
            else:
                reference_batch = sample_memory_batch(memory, cfg.memory_batch_size, memory_rng)

            _, reference = backward(net, norm, reference_batch)
            step, projected = project_gradient(gradient.values, reference.values)
            stats.projected_steps += int(projected)

            # the increment actually applied must satisfy the constraint as well
            descent, _ = project_gradient(-optimizer_update(net, opt, step), reference.values)

            if float(reference.values @ reference.values) >= PROJECTION_ZERO_NORM:
                margin = constraint_margin(descent, reference.values)
                if margin < -PROJECTION_SLACK:
                    raise ProjectionError(f"Projected step violates the memory constraint (margin {margin:.3e})")
                if math.isfinite(margin):
                    margins.append(margin)

            scale = _bounded_step(net, norm, memory_batch, -descent, budget)
            stats.halved_steps += int(0.0 < scale < 1.0)
            stats.rejected_steps += int(scale == 0.0)

        stats.epoch_losses.append(mse_loss(net, norm, batch))
        logger.debug(f"Task {task_id} ({cfg.method.value}) epoch {epoch + 1}/{cfg.epochs}: "
                     f"loss {stats.epoch_losses[-1]:.6e}")
        worker.advance(postfix=f"loss {stats.epoch_losses[-1]:.3e}")

    if constrained:
        stats.memory_loss_after = mse_loss(net, norm, memory_batch)
        if len(margins) > 0:
            stats.min_constraint_margin = float(min(margins))

    if cfg.method == LearningMethod.LL_ME:
        report = memory_update_curated(memory, batch, task_id)
        logger.debug(f"Task {task_id}: {report.inserted} inserted, {report.replaced} replaced, "
                     f"{report.rejected} rejected")
    elif cfg.method == LearningMethod.LL_NO_ME:
        memory_update_reservoir(memory, batch, task_id, derive_rng(cfg.seed, COMPONENT_MEMORY, task_id, "reservoir"))

    stats.memory_size = len(memory) if memory is not None else 0

    logger.info(f"-> Task {task_id} trained ({cfg.method.value}): loss {stats.final_loss:.4e}, "
                f"{stats.projected_steps}/{stats.total_steps} steps projected, {stats.rejected_steps} skipped, "
                f"memory {stats.memory_size}")

    return stats


class ContinualTrainer:
    """Owns net, optimizer and memory of one method arm and trains tasks strictly in order."""

    def __init__(self, net: PolicyNet, norm: Normalizer, cfg: TrainerConfig):
        self._net = net
        self._norm = norm
        self._cfg = cfg
        self._opt = OptimizerState.create(net, cfg.optimizer, cfg.learning_rate)
        self._memory = create_memory(cfg, norm)
        self._history: List[TrainTaskStats] = []

    @property
    def net(self) -> PolicyNet:
        return self._net

    @property
    def normalizer(self) -> Normalizer:
        return self._norm

    @property
    def cfg(self) -> TrainerConfig:
        return self._cfg

    @property
    def memory(self) -> Optional[EpisodicMemory]:
        return self._memory

    @property
    def history(self) -> List[TrainTaskStats]:
        return list(self._history)

    def train_task(self, batch: SampleBatch, worker=SilentWorker()) -> TrainTaskStats:
        stats = train_task(self._net, self._norm, self._opt, self._memory, batch, self._cfg,
                           task_id=len(self._history), worker=worker)
        self._history.append(stats)
        return stats

    def train_tasks(self, batches: Sequence[SampleBatch]) -> List[TrainTaskStats]:
        return [self.train_task(batch) for batch in batches]


def memory_loss(net: PolicyNet, norm: Normalizer, memory: EpisodicMemory) -> float:
    if memory is None or len(memory) == 0:
        return float("nan")
    return mse_loss(net, norm, memory.as_batch())


def initial_network(cfg: TrainerConfig, layer_dims: Sequence[int]) -> PolicyNet:
    """Same seeded initialization for every method arm."""
    return PolicyNet.initialize(derive_rng(cfg.seed, COMPONENT_INIT), layer_dims)

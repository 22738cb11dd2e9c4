# -*- coding: utf-8 -*-

"""
Tests of the continual-learning core: gradient projection, episodic memory curation and the task trainer.
"""

import numpy as np
import pytest

from config.global_constants import MAX_STEP_HALVINGS
from src.continual.agem import agem_project, constraint_margin, project_gradient, satisfies_constraint
from src.continual.memory import (EVAL_IDS, EpisodicMemory, MemoryMode, eval_fn, load_memory, memory_update_curated,
                                  memory_update_reservoir, sample_memory_batch, save_memory, sim)
from src.continual.method_enum import LearningMethod
from src.continual.trainer import ContinualTrainer, TrainerConfig, _bounded_step, initial_network, memory_loss
from src.policy.network import GradientVector, mse_loss
from src.policy.normalizer import Normalizer, fit_normalizer
from src.policy.optimizer import OptimizerMethod
from src.policy.sample import SampleBatch
from src.tools.custom_errors import (ConfigError, EmptyBatchError, EmptyMemoryError, LengthMismatchError,
                                     UnknownEvalIdError)
from tests.conftest import SMALL_DIMS, random_batch


def _state(x_ref: float) -> list:
    return [x_ref, 0.0, 0.0, 0.0, 0.0]


def _batch(x_refs, actions) -> SampleBatch:
    return SampleBatch(np.array([_state(x_ref) for x_ref in x_refs]), np.array(actions, dtype=float))


# Projection

def test_projection_of_a_conflicting_gradient() -> None:
    g = np.array([1.0, -2.0, 0.5])
    g_ref = np.array([0.0, 1.0, 1.0])

    projected, taken = project_gradient(g, g_ref)

    assert taken
    assert projected @ g_ref == pytest.approx(0.0, abs=1e-12)
    assert projected == pytest.approx(g - (g @ g_ref) / (g_ref @ g_ref) * g_ref)


def test_aligned_gradient_is_returned_unchanged() -> None:
    g = np.array([1.0, 2.0])
    projected, taken = project_gradient(g, np.array([1.0, 0.0]))

    assert not taken
    assert projected is g


def test_zero_reference_gradient() -> None:
    g = np.array([1.0, 2.0])
    projected, taken = project_gradient(g, np.zeros(2))

    assert not taken
    assert projected is g
    assert constraint_margin(g, np.zeros(2)) == float("inf")


def test_projection_length_mismatch() -> None:
    with pytest.raises(LengthMismatchError):
        project_gradient(np.zeros(3), np.zeros(2))


def test_projection_on_random_pairs() -> None:
    rng = np.random.default_rng(4801)
    dims = (2, 10, 4801)

    for index in range(10000):
        dim = dims[index % len(dims)]
        g, g_ref = rng.normal(size=dim), rng.normal(size=dim)
        projected, taken = project_gradient(g, g_ref)

        if g @ g_ref >= 0.0:
            assert not taken
            assert projected is g
            continue

        assert taken
        assert abs(projected @ g_ref) <= 1e-9 * np.linalg.norm(g) * np.linalg.norm(g_ref)
        closed_form = g - (g @ g_ref) / (g_ref @ g_ref) * g_ref
        assert np.max(np.abs(projected - closed_form)) <= 1e-12
        assert np.max(np.abs(agem_project(projected, g_ref) - projected)) <= 1e-12
        assert satisfies_constraint(projected, g_ref)


@pytest.mark.parametrize("dim", [2, 10, 4609, 4801])
def test_projection_is_the_closest_feasible_gradient(dim) -> None:
    rng = np.random.default_rng(dim)
    g, g_ref = rng.normal(size=dim), rng.normal(size=dim)
    if g @ g_ref > 0.0:
        g = -g

    projected, taken = project_gradient(g, g_ref)
    assert taken
    distance = np.linalg.norm(projected - g)

    for _ in range(1000):
        v = projected + rng.uniform(1e-3, 1.0) * np.linalg.norm(g) * rng.normal(size=dim) / np.sqrt(dim)
        if v @ g_ref < 0.0:
            # mirror into the feasible half-space
            v = v - 2.0 * (v @ g_ref) / (g_ref @ g_ref) * g_ref
        assert v @ g_ref >= 0.0
        assert np.linalg.norm(v - g) >= distance - 1e-9 * np.linalg.norm(g)


def test_agem_project_keeps_the_type() -> None:
    g = GradientVector([1.0, -1.0])
    g_ref = GradientVector([0.0, 1.0])

    projected = agem_project(g, g_ref)
    unchanged = agem_project(g, GradientVector([1.0, 0.0]))

    assert isinstance(projected, GradientVector)
    assert projected.values == pytest.approx([1.0, 0.0])
    assert unchanged is g
    assert agem_project(np.array([1.0, -1.0]), np.array([0.0, 1.0])) == pytest.approx([1.0, 0.0])


# Memory

def test_eval_functions() -> None:
    s = (1.0, 0.0, 10.0, 0.0, 0.2)

    assert eval_fn(s, -0.3) == pytest.approx(0.09)
    assert eval_fn(s, -0.3, "abs_steer") == pytest.approx(0.3)
    assert eval_fn(s, -0.3, "lateral_accel") == pytest.approx(4.0)
    assert set(EVAL_IDS) == {"steer_effort", "abs_steer", "lateral_accel"}

    with pytest.raises(UnknownEvalIdError):
        eval_fn(s, 0.0, "comfort")
    with pytest.raises(UnknownEvalIdError):
        EpisodicMemory(Normalizer.identity(), eval_id="comfort")


def test_similarity_is_squared_distance() -> None:
    assert sim([0.0, 0.0, 0.0, 0.0, 0.0], [1.0, 2.0, 0.0, 0.0, 0.0]) == 5.0


def test_curated_insert_replace_and_reject() -> None:
    memory = EpisodicMemory(Normalizer.identity(), eta=0.25)

    report = memory_update_curated(memory, _batch([0.0, 2.0], [0.3, 0.1]), task_id=0)
    assert (report.inserted, len(memory)) == (2, 2)

    # close to the first sample and better: replaces it
    report = memory_update_curated(memory, _batch([0.1], [0.1]), task_id=1)
    assert (report.replaced, report.removed, len(memory)) == (1, 1, 2)
    assert sorted(memory.normalized_states[:, 0].tolist()) == pytest.approx([0.1, 2.0])

    # close but worse: rejected
    report = memory_update_curated(memory, _batch([0.15], [0.5]), task_id=1)
    assert (report.rejected, report.removed, len(memory)) == (1, 0, 2)

    # a tie keeps the stored sample
    report = memory_update_curated(memory, _batch([0.12], [-0.1]), task_id=2)
    assert report.rejected == 1
    assert memory.count_per_task() == {0: 1, 1: 1}


def test_curated_neighborhood_keeps_only_its_best_member() -> None:
    memory = EpisodicMemory(Normalizer.identity(), eta=0.25)
    memory_update_curated(memory, _batch([0.0, 0.8], [0.2, 0.1]), task_id=0)
    assert len(memory) == 2

    report = memory_update_curated(memory, _batch([0.4], [0.3]), task_id=1)

    assert (report.rejected, report.removed) == (1, 1)
    assert len(memory) == 1
    assert memory.as_batch().states[0, 0] == 0.8
    assert memory.as_batch().actions[0] == 0.1


def test_curated_memory_keeps_stored_states_apart() -> None:
    rng = np.random.default_rng(21)
    memory = EpisodicMemory(Normalizer.identity(), eta=0.25)

    for task_id in range(30):
        batch = SampleBatch(rng.normal(size=(40, 5)), rng.normal(size=40))
        report = memory_update_curated(memory, batch, task_id)

        assert report.candidates == 40
        assert report.inserted + report.replaced + report.rejected == 40
        assert memory.min_pairwise_sim() > memory.eta


def _replay_stream(states: np.ndarray, actions: np.ndarray, eta: float):
    """
    Offer a stream one candidate at a time and keep a ledger: every stored candidate maps to the set of
    candidates it has won against, directly or through the neighbors it displaced.
    """

    memory = EpisodicMemory(Normalizer.identity(), eta=eta)
    ids = {tuple(state): index for index, state in enumerate(states)}
    ledger = {}

    for index in range(len(states)):
        before = [ids[tuple(state)] for state in memory.states]
        neighbors = {entry for entry in before if sim(states[entry], states[index]) <= eta}

        memory_update_curated(memory, SampleBatch(states[index:index + 1], actions[index:index + 1]), task_id=0)

        after = {ids[tuple(state)] for state in memory.states}
        removed = set(before) - after
        assert removed <= neighbors

        faced = {index}.union(*(ledger.pop(entry) for entry in removed))
        if index in after:
            assert neighbors <= removed
            ledger[index] = faced
        else:
            survivors = neighbors - removed
            assert len(survivors) == 1
            ledger[survivors.pop()] |= faced

    assert set(ledger) == {ids[tuple(state)] for state in memory.states}

    return memory, ledger


def test_curated_survivors_beat_every_candidate_they_faced() -> None:
    rng = np.random.default_rng(500)
    eta = 0.25

    for _ in range(500):
        spread = rng.uniform(0.1, 0.6)
        states = rng.uniform(-spread, spread, size=(60, 5))
        actions = rng.normal(0.0, 0.3, size=60)
        scores = actions ** 2

        memory, ledger = _replay_stream(states, actions, eta)

        assert memory.min_pairwise_sim() > eta
        for survivor, faced in ledger.items():
            assert scores[survivor] <= min(scores[entry] for entry in faced)

        again, _ = _replay_stream(states, actions, eta)
        assert np.array_equal(again.states, memory.states)


def test_curated_memory_uses_the_normalized_states() -> None:
    norm = Normalizer(np.zeros(5), np.full(5, 10.0))
    memory = EpisodicMemory(norm, eta=0.25)

    # raw distance 2, normalized distance 0.2 -> neighbors
    report = memory_update_curated(memory, _batch([0.0, 2.0], [0.1, 0.2]), task_id=0)

    assert (report.inserted, report.rejected, len(memory)) == (1, 1, 1)


def test_reservoir_update(rng) -> None:
    memory = EpisodicMemory(Normalizer.identity(), mode=MemoryMode.RESERVOIR, reservoir_per_task=10)

    assert memory_update_reservoir(memory, random_batch(rng, 4), 0, rng) == 4
    batch = random_batch(rng, 50)
    assert memory_update_reservoir(memory, batch, 1, np.random.default_rng(0)) == 10

    stored = memory.as_batch().states[4:]
    assert all(any(np.array_equal(row, candidate) for candidate in batch.states) for row in stored)
    assert memory.count_per_task() == {0: 4, 1: 10}

    again = EpisodicMemory(Normalizer.identity(), mode=MemoryMode.RESERVOIR, reservoir_per_task=10)
    memory_update_reservoir(again, batch, 1, np.random.default_rng(0))
    assert np.array_equal(again.as_batch().states, stored)


def test_update_mode_mismatch(rng) -> None:
    with pytest.raises(ConfigError):
        memory_update_reservoir(EpisodicMemory(Normalizer.identity()), random_batch(rng, 3), 0, rng)
    with pytest.raises(ConfigError):
        memory_update_curated(EpisodicMemory(Normalizer.identity(), mode=MemoryMode.RESERVOIR),
                              random_batch(rng, 3), 0)


def test_sample_memory_batch(rng) -> None:
    memory = EpisodicMemory(Normalizer.identity(), mode=MemoryMode.RESERVOIR, reservoir_per_task=100)

    with pytest.raises(EmptyMemoryError):
        sample_memory_batch(memory, 4, rng)

    memory_update_reservoir(memory, random_batch(rng, 20), 0, rng)

    small = sample_memory_batch(memory, 5, rng)
    large = sample_memory_batch(memory, 30, rng)

    assert len(small) == 5
    assert len(np.unique(small.states, axis=0)) == 5
    assert len(large) == 30
    assert len(np.unique(large.states, axis=0)) == 20


def _indexed_batch(rng, n: int) -> SampleBatch:
    return SampleBatch(rng.normal(size=(n, 5)), np.arange(n, dtype=float))


def _within_binomial_bounds(counts: np.ndarray, trials: int, p: float, sigmas: float = 4.0) -> bool:
    sigma = np.sqrt(trials * p * (1.0 - p))
    return bool(np.all(np.abs(counts - trials * p) <= sigmas * sigma))


def test_reservoir_selection_is_uniform(rng) -> None:
    batch = _indexed_batch(rng, 20)
    counts = np.zeros(20)
    trials = 2000

    for _ in range(trials):
        memory = EpisodicMemory(Normalizer.identity(), mode=MemoryMode.RESERVOIR, reservoir_per_task=5)
        memory_update_reservoir(memory, batch, 0, rng)
        counts[memory.as_batch().actions.astype(int)] += 1

    assert counts.sum() == 5 * trials
    assert _within_binomial_bounds(counts, trials, 0.25)


def test_memory_sampling_is_uniform(rng) -> None:
    memory = EpisodicMemory(Normalizer.identity(), mode=MemoryMode.RESERVOIR, reservoir_per_task=20)
    memory_update_reservoir(memory, _indexed_batch(rng, 20), 0, rng)
    counts = np.zeros(20)
    trials = 2000

    for _ in range(trials):
        counts[sample_memory_batch(memory, 4, rng).actions.astype(int)] += 1

    assert _within_binomial_bounds(counts, trials, 0.2)


def test_memory_file_round_trip(tmp_path, rng) -> None:
    memory = EpisodicMemory(Normalizer.identity(), eta=0.5, eval_id="abs_steer")
    memory_update_curated(memory, random_batch(rng, 30), 0)
    memory_update_curated(memory, random_batch(rng, 30), 1)

    save_memory(tmp_path / "memory.csv", tmp_path / "memory.cfg", memory)
    loaded = load_memory(tmp_path / "memory.csv", tmp_path / "memory.cfg", Normalizer.identity())

    assert (loaded.eta, loaded.eval_id, loaded.mode) == (0.5, "abs_steer", MemoryMode.CURATED)
    assert np.array_equal(loaded.as_batch().states, memory.as_batch().states)
    assert np.array_equal(loaded.task_ids, memory.task_ids)


def test_memory_views_are_read_only(rng) -> None:
    memory = EpisodicMemory(Normalizer.identity(), mode=MemoryMode.RESERVOIR)
    batch = random_batch(rng, 6)
    memory_update_reservoir(memory, batch, 0, rng)

    for view in (memory.states, memory.normalized_states, memory.actions, memory.scores):
        with pytest.raises(ValueError):
            view[0] = 1.0

    assert memory.scores == pytest.approx(batch.actions ** 2)

    memory.remove(np.array([0, 2]))
    assert len(memory) == 4
    assert np.array_equal(memory.states, batch.states[[1, 3, 4, 5]])
    assert np.array_equal(memory.actions, batch.actions[[1, 3, 4, 5]])


# Trainer

def _config(method: LearningMethod, **changes) -> TrainerConfig:
    values = dict(method=method, epochs=5, batch_size=16, memory_batch_size=32, learning_rate=5e-3, seed=11)
    values.update(changes)
    return TrainerConfig(**values)


def test_learning_method_from_str() -> None:
    assert LearningMethod.from_str("LL_ME") == LearningMethod.LL_ME
    assert not LearningMethod.NON_LL.uses_memory
    with pytest.raises(ConfigError):
        LearningMethod.from_str("ewc")


def test_invalid_trainer_config() -> None:
    with pytest.raises(ConfigError) as info:
        _config(LearningMethod.LL_ME, epochs=0, learning_rate=0.0)
    assert info.value.list_wrong_keys == ["epochs", "learning_rate"]


def test_trainer_reduces_the_task_loss(rng) -> None:
    batch = random_batch(rng, 120)
    norm = fit_normalizer([batch.states])
    trainer = ContinualTrainer(initial_network(_config(LearningMethod.NON_LL), SMALL_DIMS), norm,
                               _config(LearningMethod.NON_LL, epochs=20))

    stats = trainer.train_task(batch)

    assert stats.total_steps == 20 * 8
    assert stats.projected_steps == 0
    assert stats.memory_size == 0
    assert trainer.memory is None
    assert stats.epoch_losses[-1] < stats.epoch_losses[0]


@pytest.mark.parametrize("method, mode", [(LearningMethod.LL_ME, MemoryMode.CURATED),
                                          (LearningMethod.LL_NO_ME, MemoryMode.RESERVOIR)])
def test_lifelong_trainer_constrains_later_tasks(rng, method, mode) -> None:
    first, second = random_batch(rng, 64), random_batch(rng, 64)
    second = SampleBatch(second.states, -second.actions)
    norm = fit_normalizer([first.states, second.states])

    trainer = ContinualTrainer(initial_network(_config(method), SMALL_DIMS), norm, _config(method))
    history = trainer.train_tasks([first, second])

    assert trainer.memory.mode == mode
    assert [stats.task_id for stats in history] == [0, 1]
    assert np.isnan(history[0].memory_loss_before)
    assert history[0].memory_size > 0
    assert history[1].total_steps == 5 * 4
    assert history[1].projected_steps > 0
    assert history[1].min_constraint_margin >= -1e-9
    assert np.isfinite(history[1].memory_loss_after)
    assert memory_loss(trainer.net, norm, trainer.memory) >= 0.0


@pytest.mark.parametrize("method", [LearningMethod.LL_ME, LearningMethod.LL_NO_ME])
@pytest.mark.parametrize("optimizer", [OptimizerMethod.ADAM, OptimizerMethod.SGD])
def test_memory_loss_stays_within_five_percent(rng, method, optimizer) -> None:
    batches = [random_batch(rng, 64) for _ in range(3)]
    batches[1] = SampleBatch(batches[1].states, -batches[1].actions)
    norm = fit_normalizer([batch.states for batch in batches])

    cfg = _config(method, optimizer=optimizer, epochs=10, memory_batch_size=16)
    trainer = ContinualTrainer(initial_network(cfg, SMALL_DIMS), norm, cfg)
    history = trainer.train_tasks(batches)

    for stats in history[1:]:
        assert stats.memory_loss_before > 0.0
        assert stats.memory_loss_after <= 1.05 * stats.memory_loss_before
        assert stats.min_constraint_margin >= -1e-9
        assert stats.halved_steps + stats.rejected_steps <= stats.total_steps


def test_conflicting_task_is_forgotten_only_without_memory(rng) -> None:
    first = random_batch(rng, 64)
    second = SampleBatch(first.states, -first.actions)
    norm = fit_normalizer([first.states])

    losses = {}
    for method in (LearningMethod.NON_LL, LearningMethod.LL_NO_ME):
        cfg = _config(method, epochs=30)
        trainer = ContinualTrainer(initial_network(cfg, SMALL_DIMS), norm, cfg)
        trainer.train_task(first)
        after_first = mse_loss(trainer.net, norm, first)
        trainer.train_task(second)
        losses[method] = (after_first, mse_loss(trainer.net, norm, first))

    # the first task trains identically in both arms
    assert losses[LearningMethod.NON_LL][0] == losses[LearningMethod.LL_NO_ME][0]
    assert losses[LearningMethod.NON_LL][1] > losses[LearningMethod.LL_NO_ME][1]
    assert losses[LearningMethod.LL_NO_ME][1] <= 1.05 * losses[LearningMethod.LL_NO_ME][0]


def test_bounded_step_halves_or_skips(small_net, rng) -> None:
    norm = Normalizer.identity()
    memory_batch = random_batch(rng, 20)
    params = np.array(small_net.params)
    increment = rng.normal(size=small_net.parameter_count)
    loss = mse_loss(small_net, norm, memory_batch)

    assert _bounded_step(small_net, norm, memory_batch, increment, float("inf")) == 1.0
    assert np.array_equal(small_net.params, params + increment)

    small_net.set_params(params)
    assert _bounded_step(small_net, norm, memory_batch, increment, -1.0) == 0.0
    assert np.array_equal(small_net.params, params)

    # a budget met only by the smallest candidate
    smallest = 0.5 ** MAX_STEP_HALVINGS
    small_net.set_params(params + smallest * increment)
    budget = max(mse_loss(small_net, norm, memory_batch), loss)
    small_net.set_params(params)
    scale = _bounded_step(small_net, norm, memory_batch, increment, budget)
    assert smallest <= scale <= 1.0
    assert mse_loss(small_net, norm, memory_batch) <= budget


def test_training_is_deterministic(rng) -> None:
    batches = [random_batch(rng, 48), random_batch(rng, 48)]
    norm = fit_normalizer([batch.states for batch in batches])

    results = []
    for _ in range(2):
        cfg = _config(LearningMethod.LL_ME)
        trainer = ContinualTrainer(initial_network(cfg, SMALL_DIMS), norm, cfg)
        trainer.train_tasks(batches)
        results.append((trainer.net.flatten(), trainer.memory.as_batch().states))

    assert np.array_equal(results[0][0], results[1][0])
    assert np.array_equal(results[0][1], results[1][1])


def test_arms_share_the_initial_network() -> None:
    first = initial_network(_config(LearningMethod.NON_LL), SMALL_DIMS)
    second = initial_network(_config(LearningMethod.LL_ME), SMALL_DIMS)
    assert np.array_equal(first.params, second.params)


def test_empty_task(small_net) -> None:
    trainer = ContinualTrainer(small_net, Normalizer.identity(), _config(LearningMethod.LL_ME))
    with pytest.raises(EmptyBatchError):
        trainer.train_task(SampleBatch.empty())

# -*- coding: utf-8 -*-

"""
Tests of the experiment harness: eval matrix, rollouts, plot data, experiment configuration, manifest and CLI.
"""

import xml.etree.ElementTree as ElementTree
from dataclasses import replace

import numpy as np
import pytest

from config.global_constants import MANIFEST_FILE_NAME, PATH_DESK_EXPERIMENT_CONFIG, PATH_MINIMAL_EXPERIMENT_CONFIG
from src.continual.method_enum import LearningMethod
from src.experience.processing import segment_tasks
from src.experience.trajectory import FAILURE_DEVIATION, collect_episode
from src.experts.controller import MpcController, PurePursuitController
from src.harness.cli import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, cli
from src.harness.experiment import (ExperimentConfig, load_experiment_config, read_manifest, run_experiment,
                                    save_experiment_config, train_arm, write_arm, write_manifest)
from src.harness.metrics import (EvalMatrix, RolloutReport, deviation_statistics, eval_matrix_update,
                                 load_eval_matrix, save_eval_matrix)
from src.harness.plots import PlotData, emit_plots, plot_data_from_metrics
from src.harness.rollout import (TRACE_COLUMNS, PolicyController, rollout_baselines, rollout_closed_loop,
                                 save_traces, trace_array)
from src.policy.model_file import save_policy
from src.policy.network import PolicyNet
from src.policy.normalizer import Normalizer, fit_normalizer
from src.tools.csv_io import read_csv
from src.tools.custom_errors import ConfigError, HarnessError, MissingTestSetError
from src.tools.stage_machine import Stage
from src.vehicle.model import VehicleParams, VehicleState
from tests.conftest import SMALL_DIMS, random_batch


def _biased_net(bias: float) -> PolicyNet:
    net = PolicyNet(SMALL_DIMS)
    params = net.flatten()
    params[-1] = bias
    net.set_params(params)
    return net


def _wavy_tasks(path, params, sim_cfg):
    episodes = [collect_episode(PurePursuitController(params), path, v_ref, params, sim_cfg, seed=2, section_id="W")
                for v_ref in (4.0, 8.0)]
    return segment_tasks(episodes, seed=2)


def test_eval_matrix_rows() -> None:
    matrix = EvalMatrix(3)
    matrix.set_row(0, [0.5])
    matrix.set_row(1, [0.2, 0.4])

    assert matrix.rows_filled == 2
    assert matrix.B[1] == pytest.approx(0.3)
    assert np.isnan(matrix.B[2])
    assert matrix.is_consistent()

    with pytest.raises(HarnessError):
        matrix.set_row(0, [0.1])
    with pytest.raises(HarnessError):
        matrix.set_row(2, [0.1, 0.2])


def test_eval_matrix_needs_every_test_set(small_net, rng) -> None:
    batch = random_batch(rng, 8)

    with pytest.raises(MissingTestSetError) as info:
        eval_matrix_update(EvalMatrix(3), small_net, Normalizer.identity(), [batch, batch.subset([])], k=1)
    assert info.value.list_missing_tasks == [1]


def test_eval_matrix_file_round_trip(tmp_path, small_net, rng) -> None:
    test_sets = [random_batch(rng, 8), random_batch(rng, 6)]
    matrix = EvalMatrix(2)
    for _ in range(2):
        eval_matrix_update(matrix, small_net, Normalizer.identity(), test_sets)

    loaded = load_eval_matrix(save_eval_matrix(tmp_path / "eval_matrix.csv", matrix))

    assert loaded.rows_filled == 2
    assert loaded.B == pytest.approx(matrix.B)
    assert loaded.row(1) == pytest.approx(matrix.row(1))
    assert loaded.is_consistent()


def test_rollout_report_validation() -> None:
    with pytest.raises(HarnessError):
        RolloutReport(mean_dev=0.5, max_dev=0.2, mean_abs_delta=0.0, smoothness=0.0, completed=True)


def test_zero_policy_on_straight_road(long_straight_path, params, sim_cfg) -> None:
    report, traj = rollout_closed_loop(PolicyNet(SMALL_DIMS), Normalizer.identity(), long_straight_path, 10.0,
                                       params, sim_cfg)

    assert report.completed
    assert report.max_dev == 0.0
    assert report.steps == len(traj) - 1 > 0


def test_straight_driving_policy_leaves_a_curve(arc_path, params, sim_cfg) -> None:
    report, traj = rollout_closed_loop(PolicyNet(SMALL_DIMS), Normalizer.identity(), arc_path, 10.0, params,
                                       sim_cfg)

    assert not report.completed
    assert report.failure_reason == FAILURE_DEVIATION
    assert report.max_dev > 5.0
    assert traj.records[-1].s_star < arc_path.length - 2.0


def test_policy_controller_clamps_to_the_actuator(straight_path, params) -> None:
    controller = PolicyController(_biased_net(10.0), Normalizer.identity(), params)
    state = VehicleState(x=10.0, vx=10.0)

    assert controller.name == "policy"
    assert controller.policy_state(state, straight_path) == pytest.approx((2.0, 0.0, 10.0, 0.0, 0.0))
    assert controller.steer(state, straight_path) == params.delta_max


def test_baselines_and_traces(tmp_path, wavy_path, params, sim_cfg) -> None:
    baselines = rollout_baselines([PurePursuitController(params), MpcController(params)], wavy_path, 8.0, params,
                                  sim_cfg, section_id="W")

    assert sorted(baselines) == ["mpc", "pp"]

    for report, traj in baselines.values():
        assert report.completed
        assert (report.mean_dev, report.max_dev) == pytest.approx(deviation_statistics(traj.positions, wavy_path))

    traces = {name: trace_array(traj, wavy_path) for name, (_, traj) in baselines.items()}
    assert traces["pp"].shape == (len(baselines["pp"][1]), len(TRACE_COLUMNS) - 1)

    rows = read_csv(save_traces(tmp_path / "traces.csv", traces))
    assert tuple(rows[0]) == TRACE_COLUMNS
    assert len(rows) == sum(len(trace) for trace in traces.values())


def test_plots_without_data(tmp_path) -> None:
    written = emit_plots(PlotData(), tmp_path)

    assert len(written) == 4
    assert (tmp_path / "learning_curves.csv").read_text(encoding="utf-8") == "method,task_index,metric,value\n"
    assert not (tmp_path / "traces.svg").exists()

    for path in written:
        if path.suffix == ".svg":
            assert ElementTree.parse(path).getroot().tag.endswith("svg")


def test_plots_are_reproducible(tmp_path) -> None:
    trace = np.column_stack([np.linspace(0.0, 5.0, 11), np.linspace(0.0, 50.0, 11), np.zeros((11, 4))])
    data = PlotData(curves={"ll_me": [(0.1, 0.3, 0.1), (0.05, 0.2, 0.08), (0.04, 0.2, 0.07)],
                            "non_ll": [(0.2, 0.5, 0.2), (0.3, 0.9, 0.4), (0.2, 0.8, 0.3)]},
                    baselines={"pp": (0.05, 0.1)},
                    traces={"pp": trace})

    first = emit_plots(data, tmp_path / "a")
    second = emit_plots(data, tmp_path / "b")

    assert len(read_csv(tmp_path / "a" / "learning_curves.csv")) == 18
    assert (tmp_path / "a" / "traces.svg").is_file()
    for path_a, path_b in zip(first, second):
        assert path_a.read_bytes() == path_b.read_bytes()


def test_train_arm_and_plot_data(tmp_path, wavy_path, params, sim_cfg) -> None:
    tasks = _wavy_tasks(wavy_path, params, sim_cfg)
    norm = fit_normalizer(tasks)
    cfg = ExperimentConfig(seed=3, hidden_units=8, epochs=2, progress=False)

    arm = train_arm(cfg, LearningMethod.LL_ME, tasks, norm, test_path=wavy_path)

    assert arm.eval_matrix.rows_filled == len(tasks) == 2
    assert arm.eval_matrix.is_consistent()
    assert len(arm.training) == len(arm.rollouts) == 2
    assert arm.final_trajectory is not None

    files = write_arm(tmp_path, arm, tasks)
    assert all(path.is_file() for path in files)
    assert (tmp_path / "metrics" / "memory_ll_me.csv") in files

    data = plot_data_from_metrics(tmp_path / "metrics")
    assert [point[0] for point in data.curves["ll_me"]] == pytest.approx(arm.eval_matrix.B.tolist())
    assert [point[1] for point in data.curves["ll_me"]] == pytest.approx([report.max_dev for report in arm.rollouts])


def test_experiment_config_validation() -> None:
    with pytest.raises(ConfigError) as info:
        ExperimentConfig(train_sections=("S1", "S2"), test_section="S1")
    assert info.value.list_wrong_keys == ["train_sections", "test_section"]

    with pytest.raises(ConfigError) as info:
        ExperimentConfig(velocities=(2.0, 6.0), repetitions=0)
    assert info.value.list_wrong_keys == ["velocities", "repetitions"]

    with pytest.raises(ConfigError):
        ExperimentConfig(train_sections=("S9",))


def test_experiment_config_from_dict() -> None:
    cfg = ExperimentConfig.from_dict({"velocities": 6, "train_sections": ["S3"], "methods": "ll_me"})

    assert cfg.velocities == (6.0,)
    assert cfg.methods == (LearningMethod.LL_ME,)

    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"colour": "red"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"expert": "lqr"})


def test_minimal_experiment_config() -> None:
    cfg = load_experiment_config(PATH_MINIMAL_EXPERIMENT_CONFIG)

    assert cfg.seed == 7
    assert cfg.train_sections == ("S3",)
    assert cfg.velocities == (6.0, 12.0)
    assert cfg.epochs == 3
    assert len(cfg.curriculum) == 2


def test_experiment_config_with_relative_vehicle_file(tmp_path) -> None:
    (tmp_path / "car.cfg").write_text("m = 1200\n", encoding="utf-8")
    (tmp_path / "experiment.cfg").write_text("vehicle_config = car.cfg\nepochs = 2\n", encoding="utf-8")

    cfg = load_experiment_config(tmp_path / "experiment.cfg")

    assert cfg.vehicle == replace(VehicleParams(), m=1200.0)
    assert cfg.epochs == 2


def test_fingerprint_ignores_output_location() -> None:
    cfg = ExperimentConfig(seed=4)

    assert cfg.with_overrides(out_dir="elsewhere", progress=False).fingerprint() == cfg.fingerprint()
    assert cfg.with_overrides(seed=5).fingerprint() != cfg.fingerprint()
    assert replace(cfg, vehicle=replace(cfg.vehicle, m=1400.0)).fingerprint() != cfg.fingerprint()


def test_experiment_config_snapshot_round_trip(tmp_path) -> None:
    cfg = ExperimentConfig(seed=9, out_dir=tmp_path, velocities=(4.0, 8.0), methods=(LearningMethod.NON_LL,),
                           vehicle=replace(VehicleParams(), Cf=61000.25), progress=False)

    files = save_experiment_config(tmp_path, cfg)

    assert all(path.is_file() for path in files)
    assert load_experiment_config(tmp_path / "experiment.cfg") == cfg


def test_manifest_round_trip(tmp_path) -> None:
    path = write_manifest(tmp_path, [tmp_path / "b.csv", tmp_path / "sub" / "a.csv", tmp_path / "b.csv"], 5, "abc")

    assert path == tmp_path / MANIFEST_FILE_NAME
    assert read_manifest(path) == (5, "abc", ["b.csv", "sub/a.csv"])

    path.write_text("# lifetrack results manifest\nseed = 5\nfiles = 1\n", encoding="utf-8")
    with pytest.raises(HarnessError):
        read_manifest(path)


def test_cli_usage_errors(capsys) -> None:
    assert cli([]) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err

    assert cli(["bogus"]) == EXIT_USAGE
    assert cli(["run", "--seed", "-1"]) == EXIT_USAGE
    assert "unsigned 64-bit" in capsys.readouterr().err

    assert cli(["eval", "--velocity", "0"]) == EXIT_USAGE
    assert cli(["--help"]) == EXIT_OK


def test_cli_tracks(tmp_path) -> None:
    assert cli(["tracks", "--out", str(tmp_path), "--section", "S1", "--no-progress"]) == EXIT_OK

    assert (tmp_path / "tracks" / "S1.cfg").is_file()
    assert len(read_csv(tmp_path / "tracks" / "S1.csv")) == 61
    assert not (tmp_path / "tracks" / "S2.cfg").exists()


def test_cli_failures(tmp_path) -> None:
    assert cli(["run", "--config", str(tmp_path / "missing.cfg")]) == EXIT_FAILURE
    assert cli(["plot", "--out", str(tmp_path)]) == EXIT_FAILURE
    assert cli(["eval", "--out", str(tmp_path), "--no-baselines"]) == EXIT_FAILURE
    assert cli(["train", "--out", str(tmp_path), "--no-progress"]) == EXIT_FAILURE


def test_cli_eval_of_a_saved_model(tmp_path, capsys) -> None:
    save_policy(tmp_path / "models" / "zero.txt", PolicyNet(SMALL_DIMS), Normalizer.identity())

    code = cli(["eval", "--out", str(tmp_path), "--section", "S1", "--velocity", "10", "--no-baselines"])

    assert code == EXIT_OK
    assert [row["controller"] for row in read_csv(tmp_path / "metrics" / "evaluation.csv")] == ["zero"]
    assert (tmp_path / "metrics" / "traces.csv").is_file()
    assert "zero: mean dev" in capsys.readouterr().out


@pytest.mark.slow
def test_minimal_experiment_is_reproducible(tmp_path) -> None:
    cfg = load_experiment_config(PATH_MINIMAL_EXPERIMENT_CONFIG).with_overrides(progress=False)

    first = run_experiment(cfg.with_overrides(out_dir=tmp_path / "a"))
    run_experiment(cfg.with_overrides(out_dir=tmp_path / "b"))

    assert first.stages.current_stage == Stage.OUTPUTS_WRITTEN
    assert sorted(first.arms) == ["ll_me", "ll_no_me", "non_ll"]

    seed, fingerprint, listed = read_manifest(tmp_path / "a" / MANIFEST_FILE_NAME)
    assert (seed, fingerprint) == (7, cfg.fingerprint())
    assert "plots/learning_curves.svg" in listed

    for name in listed:
        assert (tmp_path / "a" / name).stat().st_size > 0
        # the config snapshot records the output directory
        if name != "experiment.cfg":
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name

    assert (tmp_path / "a" / MANIFEST_FILE_NAME).read_bytes() == (tmp_path / "b" / MANIFEST_FILE_NAME).read_bytes()


@pytest.fixture(scope="module")
def desk_results(tmp_path_factory):
    cfg = load_experiment_config(PATH_DESK_EXPERIMENT_CONFIG)
    return run_experiment(cfg.with_overrides(progress=False, out_dir=tmp_path_factory.mktemp("desk")))


@pytest.mark.slow
def test_desk_run_forgets_most_without_lifelong_learning(desk_results) -> None:
    final = {name: arm.eval_matrix.B[-1] for name, arm in desk_results.arms.items()}

    assert len(desk_results.tasks) >= 10
    assert all(arm.eval_matrix.rows_filled == len(desk_results.tasks) for arm in desk_results.arms.values())
    assert final["non_ll"] > final["ll_no_me"]
    assert final["non_ll"] > final["ll_me"]


@pytest.mark.slow
@pytest.mark.parametrize("method", ["ll_me", "ll_no_me"])
def test_desk_run_preserves_the_memory_loss(desk_results, method) -> None:
    training = desk_results.arms[method].training

    assert len(training) == len(desk_results.tasks)
    for stats in training[1:]:
        assert stats.memory_loss_after <= 1.05 * stats.memory_loss_before, stats.task_id


@pytest.mark.slow
def test_desk_policy_tracks_the_held_out_section(desk_results) -> None:
    assert (desk_results.config.test_section, desk_results.config.eval_velocity) == ("S1", 10.0)
    assert desk_results.config.test_section not in desk_results.config.train_sections

    pure_pursuit, _ = desk_results.baselines["pp"]
    final = desk_results.arms["ll_me"].rollouts[-1]

    assert pure_pursuit.completed
    assert final.completed
    assert final.max_dev <= 1.1 * pure_pursuit.max_dev

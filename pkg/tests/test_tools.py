# -*- coding: utf-8 -*-

"""
Tests of the shared tools: key-value configs, CSV cells, seeding, progress workers, stage machine and
schema validation.
"""

import pytest

from config.global_constants import PATH_EXPERIMENT_CONFIG_SCHEMA
from src.tools.csv_io import format_cell, read_csv, read_csv_array, write_csv
from src.tools.custom_errors import ConfigError, IllegalStageTransitionError
from src.tools.kv_config import (config_hash, convert_value, dump_kv_text, load_kv_file, parse_kv_text,
                                 save_kv_file)
from src.tools.progress import ProgressWorker, SilentWorker, make_worker
from src.tools.seeding import derive_int_seed, derive_rng
from src.tools.stage_machine import Stage, StageMachine
from src.utils.json_schema_validator import JSONSchemaValidator


def test_convert_value_scalars_and_lists() -> None:
    assert convert_value(" 7 ") == 7
    assert convert_value("0.25") == 0.25
    assert convert_value("true") is True
    assert convert_value("S1") == "S1"
    assert convert_value("6, 12") == [6, 12]
    assert convert_value("S3,") == ["S3"]


def test_parse_kv_text_skips_comments_and_blank_lines() -> None:
    text = "# header\n\nseed = 7\nmethods = non_ll, ll_me\nexpert = mpc  \n"
    assert parse_kv_text(text) == {"seed": 7, "methods": ["non_ll", "ll_me"], "expert": "mpc"}


def test_parse_kv_text_reports_malformed_lines() -> None:
    with pytest.raises(ConfigError) as info:
        parse_kv_text("seed = 1\nnot a pair\n = 3\n", source="bad.cfg")
    assert info.value.list_wrong_keys == ["bad.cfg:2", "bad.cfg:3"]


def test_kv_file_round_trip_keeps_floats_and_single_element_lists(tmp_path) -> None:
    config = {"eta": 0.1, "train_sections": ["S3"], "velocities": [3.0, 6.5], "progress": False, "seed": 42}
    save_kv_file(tmp_path / "a.cfg", config, header_comments=["snapshot"])

    loaded = load_kv_file(tmp_path / "a.cfg")

    assert loaded["eta"] == 0.1
    assert loaded["train_sections"] == ["S3"]
    assert loaded["velocities"] == [3, 6.5]
    assert loaded["progress"] is False
    assert loaded["seed"] == 42


def test_load_kv_file_missing(tmp_path) -> None:
    with pytest.raises(ConfigError):
        load_kv_file(tmp_path / "missing.cfg")


def test_config_hash_ignores_key_order() -> None:
    assert config_hash({"a": 1, "b": [1.5, 2]}) == config_hash({"b": [1.5, 2], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})
    assert dump_kv_text({"a": 1}, ["c"]) == "# c\na = 1\n"


def test_format_cell() -> None:
    assert format_cell(True) == "1"
    assert format_cell(False) == "0"
    assert format_cell(3) == "3"
    assert format_cell(0.5) == "0.5"
    assert float(format_cell(0.1)) == 0.1
    assert format_cell("train") == "train"


def test_csv_round_trip(tmp_path) -> None:
    path = write_csv(tmp_path / "sub" / "t.csv", ("x", "y", "tag"), [(0.1, 2, "a"), (1.0 / 3.0, -1, "b")])

    rows = read_csv(path)
    values = read_csv_array(path, ("x", "y"))

    assert [row["tag"] for row in rows] == ["a", "b"]
    assert values[1, 0] == 1.0 / 3.0
    assert values.shape == (2, 2)


def test_read_csv_array_header_only(tmp_path) -> None:
    path = write_csv(tmp_path / "empty.csv", ("x", "y"), [])
    assert read_csv_array(path, ("x", "y")).shape == (0, 2)


def test_derived_streams_are_reproducible_and_independent() -> None:
    first = derive_rng(5, "shuffle", 0).random(4)
    again = derive_rng(5, "shuffle", 0).random(4)
    other_task = derive_rng(5, "shuffle", 1).random(4)
    other_component = derive_rng(5, "memory", 0).random(4)

    assert (first == again).all()
    assert not (first == other_task).all()
    assert not (first == other_component).all()
    assert derive_int_seed(5, "init") == derive_int_seed(5, "init")


def test_derive_rng_accepts_full_u64_seed() -> None:
    assert derive_rng(2 ** 64 - 1, "init").random() >= 0.0


def test_make_worker() -> None:
    assert isinstance(make_worker(3, "x", enabled=False), SilentWorker)
    assert isinstance(make_worker(3, "x", enabled=True), ProgressWorker)


def test_progress_worker_percentage() -> None:
    worker = ProgressWorker(total=4, description="epochs")
    worker.start()
    worker.advance()
    assert worker.percentage == 25
    worker.advance(postfix="loss 1e-3")
    assert worker.percentage == 50
    worker.finish()
    assert worker.percentage == 100


def test_stage_machine_full_run() -> None:
    machine = StageMachine()
    for stage in (Stage.TRACKS_READY, Stage.EPISODES_COLLECTED, Stage.TASKS_SEGMENTED, Stage.NORMALIZER_FROZEN,
                  Stage.ARMS_TRAINED, Stage.ARMS_TRAINED, Stage.BASELINES_EVALUATED, Stage.OUTPUTS_WRITTEN):
        machine.set_stage(stage)

    assert machine.current_stage == Stage.OUTPUTS_WRITTEN
    assert machine.last_stage == Stage.BASELINES_EVALUATED
    assert len(machine.history) == 9


def test_stage_machine_rejects_skipping_the_normalizer() -> None:
    machine = StageMachine()
    machine.set_stage(Stage.TRACKS_READY)
    machine.set_stage(Stage.EPISODES_COLLECTED)
    machine.set_stage(Stage.TASKS_SEGMENTED)

    with pytest.raises(IllegalStageTransitionError):
        machine.set_stage(Stage.ARMS_TRAINED)

    assert machine.current_stage == Stage.TASKS_SEGMENTED


def test_schema_validator_lists_offending_entries() -> None:
    validator = JSONSchemaValidator(PATH_EXPERIMENT_CONFIG_SCHEMA)

    assert validator.is_valid_json_data({"seed": 3})

    with pytest.raises(ConfigError) as info:
        validator.validate({"seed": 3, "colour": "red"}, source="x.cfg")
    assert any("colour" in entry for entry in info.value.list_wrong_keys)


def test_schema_validator_missing_schema_file(tmp_path) -> None:
    with pytest.raises(ConfigError):
        JSONSchemaValidator(tmp_path / "nope.json")

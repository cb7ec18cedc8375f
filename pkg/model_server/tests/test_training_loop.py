import json

import pytest

from conftest import TINY
from server_helpers import marker_instances, toy_instances, write_instances
from tdmserve.data import SchemaError
from tdmserve.train import TrainConfig, TrainResult, train


def test_defaults_pin_the_recipe():
    config = TrainConfig()
    assert config.learning_rate == 1e-5
    assert config.epochs == 14
    assert config.weight_decay == 0.01
    assert config.max_seq_len == 512
    # and everything is overridable
    assert TrainConfig(learning_rate=3e-4, epochs=2).epochs == 2


def test_loop_learns_marked_data_with_capable_lr(tmp_path):
    """Sanity check that the optimization loop itself works: a small
    fresh model at a healthy learning rate fits data whose label leaks
    through a marker token."""
    instances = write_instances(tmp_path / "inst.jsonl", marker_instances())
    config = TrainConfig(
        family="bidirectional-autoencoder",
        init="scratch",
        epochs=30,
        learning_rate=1e-3,
        batch_size=8,
        seed=3,
        **TINY,
    )
    result = train(instances, tmp_path / "model", config)
    assert isinstance(result, TrainResult)
    assert result.final_train_accuracy >= 0.95
    assert result.init_used == "scratch"
    # loss log has one entry per epoch and the tail improves on the head
    assert len(result.epoch_log) == 30
    assert result.epoch_log[-1]["loss"] < result.epoch_log[0]["loss"]


def test_artifact_directory_contents(tiny_artifact):
    artifact = json.loads((tiny_artifact / "artifact.json").read_text())
    assert artifact["family"] == "bidirectional-autoencoder"
    assert artifact["checkpoint_policy"] == "last-epoch"
    log = json.loads((tiny_artifact / "training_log.json").read_text())
    assert all({"epoch", "loss", "accuracy"} <= set(row) for row in log)
    predictions = json.loads((tiny_artifact / "train_predictions.json").read_text())
    assert all(0.0 <= s <= 1.0 for s in predictions["scores"])
    assert (tiny_artifact / "config.json").exists()


def test_empty_instances_file_fails(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("", encoding="utf-8")
    with pytest.raises(SchemaError):
        train(path, tmp_path / "model", TrainConfig(init="scratch", epochs=1, **TINY))


def test_schema_violation_propagates_line_number(tmp_path):
    records = toy_instances(2)
    records[1]["label"] = 1  # not a boolean
    path = write_instances(tmp_path / "bad.jsonl", records)
    with pytest.raises(SchemaError, match="line 2"):
        train(path, tmp_path / "model", TrainConfig(init="scratch", epochs=1, **TINY))


def test_training_is_deterministic_at_fixed_seed(tmp_path):
    instances = write_instances(tmp_path / "inst.jsonl", toy_instances(4))
    config = TrainConfig(
        init="scratch", epochs=2, learning_rate=1e-3, seed=11, batch_size=4, **TINY
    )
    first = train(instances, tmp_path / "m1", config)
    second = train(instances, tmp_path / "m2", config)
    assert first.train_scores == pytest.approx(second.train_scores, abs=1e-6)

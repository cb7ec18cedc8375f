from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from server_helpers import LiveServer, marker_instances, write_instances  # noqa: E402
from tdmserve.train import TrainConfig, train  # noqa: E402

TINY = dict(scratch_hidden=64, scratch_layers=2, scratch_heads=2)


@pytest.fixture(scope="session")
def tiny_artifact(tmp_path_factory):
    """A small trained artifact shared by the wire-protocol tests."""
    root = tmp_path_factory.mktemp("artifact")
    instances = write_instances(root / "instances.jsonl", marker_instances())
    config = TrainConfig(
        family="bidirectional-autoencoder",
        init="scratch",
        epochs=3,
        learning_rate=1e-3,
        batch_size=8,
        **TINY,
    )
    result = train(instances, root / "model", config)
    return result.artifact_dir


@pytest.fixture(scope="session")
def live_server(tiny_artifact):
    server = LiveServer(tiny_artifact, max_batch=64).start()
    yield server
    server.stop()

"""Pytest fixtures; shared helpers live in pipeline_helpers."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pipeline_helpers import StubScoreServer  # noqa: E402


@pytest.fixture
def stub_server():
    server = StubScoreServer().start()
    yield server
    server.stop()

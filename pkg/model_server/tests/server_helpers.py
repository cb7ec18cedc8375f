"""Helpers for the scorer-service tests: toy instance files and a live
uvicorn server wrapper."""

from __future__ import annotations

import json
import threading
import time
from pathlib import Path

import uvicorn

from tdmserve.server import create_app


def toy_instances(n_papers: int = 16) -> list[dict]:
    """One true and one false instance per paper, 2*n_papers total.

    Premises embed their own triple's distinctive tokens, so entailment
    is learnable from lexical evidence alone.
    """
    records = []
    for i in range(n_papers):
        j = i % 8
        k = (j + 3) % 8
        premise = (
            f"we evaluate approach number {i} . "
            f"taskword{j} : benchword{j} : meterword{j} appears here verbatim ."
        )
        records.append(
            {
                "paper_id": f"p{i:02d}",
                "premise": premise,
                "task": f"taskword{j}",
                "dataset": f"benchword{j}",
                "metric": f"meterword{j}",
                "label": True,
            }
        )
        records.append(
            {
                "paper_id": f"p{i:02d}",
                "premise": premise,
                "task": f"taskword{k}",
                "dataset": f"benchword{k}",
                "metric": f"meterword{k}",
                "label": False,
            }
        )
    return records


def marker_instances(n_papers: int = 16) -> list[dict]:
    """Instances whose label leaks through an unmistakable marker token.

    Used to check that the optimization loop itself can fit an obvious
    signal with a small fresh model; no pretrained knowledge needed.
    """
    records = []
    for i in range(n_papers):
        for label in (True, False):
            marker = "positivemarker yes yes" if label else "negativemarker no no"
            records.append(
                {
                    "paper_id": f"p{i:02d}",
                    "premise": f"document {i} text . {marker} . trailing words here",
                    "task": f"task{i % 4}",
                    "dataset": f"data{i % 4}",
                    "metric": f"met{i % 4}",
                    "label": label,
                }
            )
    return records


def write_instances(path: Path, records: list[dict]) -> Path:
    path.write_text(
        "\n".join(json.dumps(r, ensure_ascii=False) for r in records) + "\n",
        encoding="utf-8",
    )
    return path


class LiveServer:
    """A /score service running in a background thread on a free port."""

    def __init__(self, model_dir: Path, max_batch: int = 1024):
        app = create_app(model_dir, max_batch=max_batch)
        self._config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="warning")
        self._server = uvicorn.Server(self._config)
        self._thread = threading.Thread(target=self._server.run, daemon=True)

    def start(self) -> "LiveServer":
        self._thread.start()
        deadline = time.monotonic() + 30
        while not self._server.started:
            if time.monotonic() > deadline:
                raise RuntimeError("server did not start in time")
            time.sleep(0.05)
        return self

    @property
    def url(self) -> str:
        port = self._server.servers[0].sockets[0].getsockname()[1]
        return f"http://127.0.0.1:{port}/score"

    def stop(self) -> None:
        self._server.should_exit = True
        self._thread.join(timeout=10)

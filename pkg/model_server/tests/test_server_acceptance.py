"""Acceptance checks for the scorer service.

The overfit check is faithful to the stated recipe: one of the three
model families, a 32-instance file, 14 epochs at learning rate 1e-5.
It prefers the published pretrained checkpoint and only falls back to a
fresh-weights build of the same architecture when the checkpoint cannot
be fetched (fully offline hosts). Without pretraining the pinned
learning rate cannot memorize the file, so on offline hosts this check
fails by design instead of being silently weakened.
"""

from __future__ import annotations

import functools
import json
from pathlib import Path

import pytest
import requests

from server_helpers import LiveServer, toy_instances, write_instances
from tdmserve.train import TrainConfig, train

GOLDEN = Path(__file__).parent / "golden"


def criterion(name):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"[ACCEPTANCE] {name}: FAIL", flush=True)
                raise
            print(f"[ACCEPTANCE] {name}: PASS", flush=True)

        return wrapper

    return decorate


@criterion("overfit-check")
def test_overfit_32_instances_at_pinned_hyperparameters(tmp_path):
    instances = write_instances(tmp_path / "instances.jsonl", toy_instances(16))
    config = TrainConfig(
        family="bidirectional-autoencoder",
        learning_rate=1e-5,
        epochs=14,
        init="auto",
        seed=0,
    )
    result = train(instances, tmp_path / "model", config)

    # served scores agree with training-time predictions
    server = LiveServer(result.artifact_dir).start()
    try:
        records = [json.loads(line) for line in (tmp_path / "instances.jsonl").read_text().splitlines()]
        items = [
            {
                "premise": r["premise"],
                "hypothesis": f"{r['task']} : {r['dataset']} : {r['metric']}",
            }
            for r in records
        ]
        response = requests.post(server.url, json={"items": items}, timeout=120)
        assert response.status_code == 200
        served = response.json()["scores"]
    finally:
        server.stop()
    assert served == pytest.approx(result.train_scores, abs=1e-4)

    assert result.final_train_accuracy >= 0.95, (
        f"training accuracy {result.final_train_accuracy:.3f} < 0.95 "
        f"(initialization: {result.init_used}; with 'scratch' the published "
        f"pretrained checkpoint was unreachable, and fresh weights cannot "
        f"memorize 32 instances in 14 epochs at learning rate 1e-5)"
    )

    # memorized true hypotheses score above the decision midpoint
    true_scores = [s for s, r in zip(served, records) if r["label"]]
    assert all(s > 0.5 for s in true_scores)


@criterion("wire-conformance")
def test_server_passes_golden_protocol_suite(live_server):
    golden_request = (GOLDEN / "score_request.json").read_bytes()
    response = requests.post(
        live_server.url,
        data=golden_request,
        headers={"Content-Type": "application/json; charset=utf-8"},
        timeout=60,
    )
    assert response.status_code == 200
    payload = response.json()
    assert set(payload) == {"scores"}
    assert len(payload["scores"]) == 2
    assert all(isinstance(s, float) and 0.0 <= s <= 1.0 for s in payload["scores"])

    # order binding under a reversed batch
    items = json.loads(golden_request)["items"]
    reversed_payload = requests.post(
        live_server.url, json={"items": list(reversed(items))}, timeout=60
    ).json()
    assert reversed_payload["scores"] == list(reversed(payload["scores"]))

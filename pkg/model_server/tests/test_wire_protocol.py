"""Wire conformance against a live server: the same golden fixtures the
pipeline's client is tested with, exercised server-side."""

import json
import random
from pathlib import Path

import requests

GOLDEN = Path(__file__).parent / "golden"


def _post(url: str, body: bytes) -> requests.Response:
    return requests.post(
        url, data=body, headers={"Content-Type": "application/json; charset=utf-8"}, timeout=60
    )


def test_accepts_golden_request_bytes(live_server):
    response = _post(live_server.url, (GOLDEN / "score_request.json").read_bytes())
    assert response.status_code == 200
    payload = response.json()
    assert set(payload) == {"scores"}
    assert len(payload["scores"]) == 2
    assert all(0.0 <= s <= 1.0 for s in payload["scores"])


def test_golden_response_shape_is_what_the_server_emits(live_server):
    # the canonical response fixture parses to the same shape the live
    # server produces: a single "scores" array of floats
    golden = json.loads((GOLDEN / "score_response.json").read_text())
    response = _post(live_server.url, (GOLDEN / "score_request.json").read_bytes())
    assert set(response.json()) == set(golden) == {"scores"}


def test_order_preserved_and_pure_for_duplicates(live_server):
    items = [
        {"premise": f"premise number {i}", "hypothesis": f"h{i % 4} : d{i % 4} : m{i % 4}"}
        for i in range(12)
    ]
    items = items + items[:3]  # duplicates must score identically
    body = json.dumps({"items": items}).encode("utf-8")
    first = _post(live_server.url, body).json()["scores"]
    assert len(first) == 15
    assert first[:3] == first[12:]
    # stable across repeated calls at fixed weights
    second = _post(live_server.url, body).json()["scores"]
    assert first == second


def test_scores_track_items_under_shuffling(live_server):
    items = [
        {"premise": "alpha beta gamma", "hypothesis": f"hyp{i} : d{i} : m{i}"}
        for i in range(8)
    ]
    base = _post(live_server.url, json.dumps({"items": items}).encode()).json()["scores"]
    by_hypothesis = {item["hypothesis"]: s for item, s in zip(items, base)}
    rng = random.Random(4)
    for _ in range(3):
        rng.shuffle(items)
        scores = _post(live_server.url, json.dumps({"items": items}).encode()).json()["scores"]
        assert scores == [by_hypothesis[item["hypothesis"]] for item in items]


def test_batch_split_equals_single_batch(live_server):
    items = [
        {"premise": f"text {i} words", "hypothesis": f"a{i} : b{i} : c{i}"}
        for i in range(10)
    ]
    whole = _post(live_server.url, json.dumps({"items": items}).encode()).json()["scores"]
    left = _post(live_server.url, json.dumps({"items": items[:5]}).encode()).json()["scores"]
    right = _post(live_server.url, json.dumps({"items": items[5:]}).encode()).json()["scores"]
    assert whole == left + right


def test_oversize_batch_is_413_with_json_error(live_server):
    items = [{"premise": "p", "hypothesis": "h"}] * 65  # server max_batch=64
    response = _post(live_server.url, json.dumps({"items": items}).encode())
    assert response.status_code == 413
    assert "error" in response.json()


def test_empty_items_is_400_with_json_error(live_server):
    response = _post(live_server.url, json.dumps({"items": []}).encode())
    assert response.status_code == 400
    assert "error" in response.json()


def test_malformed_body_is_4xx_with_json_error(live_server):
    response = _post(live_server.url, b"{not json")
    assert 400 <= response.status_code < 500
    assert "error" in response.json()


def test_pipeline_remote_client_runs_against_this_server(live_server):
    # cross-package conformance: the pipeline's own HTTP scorer client
    # consumes this server unmodified
    pytest = __import__("pytest")
    scoring = pytest.importorskip("tdmine.scoring")
    scorer = scoring.RemoteScorer(live_server.url, batch_size=4)
    request = scoring.ScoreRequest.of(
        [(f"premise {i}", f"t{i} : d{i} : m{i}") for i in range(9)]
    )
    scores = scorer.score(request)
    assert len(scores) == 9
    assert all(0.0 <= s <= 1.0 for s in scores)

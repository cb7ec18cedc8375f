"""Entailment scoring of (premise, hypothesis) pairs.

Two scorer backends share one contract: the embedded lexical-overlap
baseline, and an HTTP client for a remote model service speaking the
``/score`` wire protocol. Paper-level prediction scores every candidate
triple and applies a threshold with an Unknown fallback.
"""

from __future__ import annotations

import json
import time
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import requests

from tdmine.corpus import UNKNOWN, Label, TdmTriple


class ScorerError(Exception):
    """Base class for scoring failures."""


class ScorerTransportError(ScorerError):
    """Transport-level failure after exhausting retries."""


class ScorerProtocolError(ScorerError):
    """The backend violated the wire contract (shape, range, status)."""


def render_hypothesis(triple: TdmTriple) -> str:
    """Canonical textual form of a triple: ``task : dataset : metric``."""
    return f"{triple.task} : {triple.dataset} : {triple.metric}"


@dataclass(frozen=True)
class ScoreRequest:
    """An ordered batch of (premise, hypothesis) pairs; responses must
    preserve this order."""

    items: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if not self.items:
            raise ValueError("ScoreRequest.items must be non-empty")

    @classmethod
    def of(cls, pairs: Sequence[tuple[str, str]]) -> "ScoreRequest":
        return cls(items=tuple(pairs))


@dataclass
class PaperPrediction:
    """Thresholded triple predictions for one paper.

    ``predicted`` holds every candidate scoring above the threshold, or
    exactly ``{UNKNOWN}`` when none does.
    """

    paper_id: str
    predicted: set
    scores: dict[TdmTriple, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        from tdmine.corpus import label_sort_key

        return {
            "paper_id": self.paper_id,
            "predicted": [
                lab.to_json() for lab in sorted(self.predicted, key=label_sort_key)
            ],
            "scores": [
                {**t.to_json(), "score": s} for t, s in sorted(self.scores.items())
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PaperPrediction":
        from tdmine.corpus import label_from_json

        scores = {}
        for row in d["scores"]:
            scores[TdmTriple(row["task"], row["dataset"], row["metric"])] = row["score"]
        return cls(
            paper_id=d["paper_id"],
            predicted={label_from_json(v) for v in d["predicted"]},
            scores=scores,
        )


class Scorer(ABC):
    """Scores batches of (premise, hypothesis) pairs into [0, 1]."""

    @abstractmethod
    def score(self, request: ScoreRequest) -> list[float]:
        """One score per item, same order as the request."""


class LexicalScorer(Scorer):
    """Reference baseline: fraction of distinct hypothesis tokens that
    occur among the premise tokens, case-folded. Concurrency-safe."""

    def score(self, request: ScoreRequest) -> list[float]:
        return [self._score_pair(p, h) for p, h in request.items]

    @staticmethod
    def _score_pair(premise: str, hypothesis: str) -> float:
        hyp_tokens = {t.casefold() for t in hypothesis.split()}
        if not hyp_tokens:
            return 0.0
        prem_tokens = {t.casefold() for t in premise.split()}
        return len(hyp_tokens & prem_tokens) / len(hyp_tokens)


class RemoteScorer(Scorer):
    """Client for the HTTP ``/score`` protocol.

    Batches of ``batch_size`` items are POSTed as
    ``{"items": [{"premise": ..., "hypothesis": ...}, ...]}`` and answered
    by ``{"scores": [...]}``. Transport failures are retried with
    exponential backoff; protocol violations are hard errors. Batches may
    fan out over a small thread pool while the response order is kept.
    """

    RETRYABLE_STATUSES = (502, 503, 504)

    def __init__(
        self,
        url: str,
        batch_size: int = 64,
        max_retries: int = 3,
        backoff: float = 0.5,
        pool_size: int = 4,
        timeout: float = 60.0,
        session: requests.Session | None = None,
    ):
        self.url = url
        self.batch_size = batch_size
        self.max_retries = max_retries
        self.backoff = backoff
        self.pool_size = pool_size
        self.timeout = timeout
        self._session = session or requests.Session()

    def score(self, request: ScoreRequest) -> list[float]:
        batches = [
            request.items[i : i + self.batch_size]
            for i in range(0, len(request.items), self.batch_size)
        ]
        if len(batches) > 1 and self.pool_size > 1:
            with ThreadPoolExecutor(max_workers=self.pool_size) as pool:
                results = list(pool.map(self._score_batch, batches))
        else:
            results = [self._score_batch(b) for b in batches]
        return [s for scores in results for s in scores]

    def _score_batch(self, items: tuple[tuple[str, str], ...]) -> list[float]:
        body = encode_score_request(items)
        response = self._post_with_retries(body)
        if response.status_code != 200:
            raise ScorerProtocolError(
                f"scorer returned status {response.status_code}: "
                f"{_error_message(response)}"
            )
        return decode_score_response(response.content, expected=len(items))

    def _post_with_retries(self, body: bytes) -> requests.Response:
        delay = self.backoff
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(delay)
                delay *= 2
            try:
                response = self._session.post(
                    self.url,
                    data=body,
                    headers={"Content-Type": "application/json; charset=utf-8"},
                    timeout=self.timeout,
                )
            except requests.RequestException as exc:
                last_error = exc
                continue
            if response.status_code in self.RETRYABLE_STATUSES:
                last_error = ScorerTransportError(
                    f"scorer returned retryable status {response.status_code}"
                )
                continue
            return response
        raise ScorerTransportError(
            f"scorer unreachable after {self.max_retries + 1} attempts: {last_error}"
        )


def encode_score_request(items: Sequence[tuple[str, str]]) -> bytes:
    """Canonical UTF-8 request body for the wire protocol."""
    payload = {
        "items": [{"premise": p, "hypothesis": h} for p, h in items]
    }
    return json.dumps(payload, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


def decode_score_response(body: bytes, expected: int) -> list[float]:
    """Parse and validate a ``{"scores": [...]}`` response body."""
    try:
        payload = json.loads(body.decode("utf-8"))
        scores = payload["scores"]
    except (ValueError, KeyError, UnicodeDecodeError) as exc:
        raise ScorerProtocolError(f"unparseable scorer response: {exc}") from exc
    if not isinstance(scores, list) or len(scores) != expected:
        raise ScorerProtocolError(
            f"scorer returned {len(scores) if isinstance(scores, list) else 'non-list'}"
            f" scores for {expected} items"
        )
    out = []
    for value in scores:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ScorerProtocolError(f"non-numeric score: {value!r}")
        if not 0.0 <= value <= 1.0:
            raise ScorerProtocolError(f"score out of [0, 1]: {value!r}")
        out.append(float(value))
    return out


def _error_message(response: requests.Response) -> str:
    try:
        return str(response.json().get("error", response.text[:200]))
    except ValueError:
        return response.text[:200]


def make_scorer(uri: str, **kwargs) -> Scorer:
    """Build a scorer from its URI: ``lexical:`` for the embedded
    baseline, ``http(s)://host/score`` for the remote client."""
    if uri in ("lexical", "lexical:"):
        return LexicalScorer()
    if uri.startswith(("http://", "https://")):
        return RemoteScorer(uri, **kwargs)
    raise ValueError(f"unsupported scorer URI: {uri!r}")


def predict_paper(
    scorer: Scorer,
    paper_id: str,
    premise: str,
    candidates: Sequence[TdmTriple],
    threshold: float = 0.5,
) -> PaperPrediction:
    """Score every candidate triple against the paper's premise and apply
    the threshold decision rule with Unknown fallback."""
    if not candidates:
        raise ValueError("candidates must be non-empty")
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1)")
    request = ScoreRequest.of([(premise, render_hypothesis(c)) for c in candidates])
    try:
        scores = scorer.score(request)
    except ScorerError as exc:
        raise type(exc)(f"paper {paper_id!r}: {exc}") from exc
    score_map = dict(zip(candidates, scores))
    predicted: set[Label] = {c for c, s in score_map.items() if s > threshold}
    if not predicted:
        predicted = {UNKNOWN}
    return PaperPrediction(paper_id=paper_id, predicted=predicted, scores=score_map)


def write_predictions_jsonl(predictions, fp) -> int:
    n = 0
    for pred in predictions:
        fp.write(json.dumps(pred.to_dict(), ensure_ascii=False) + "\n")
        n += 1
    return n


def read_predictions_jsonl(fp) -> list[PaperPrediction]:
    return [PaperPrediction.from_dict(json.loads(line)) for line in fp if line.strip()]

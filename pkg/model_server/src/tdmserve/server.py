"""The /score HTTP service.

POST /score with ``{"items": [{"premise": ..., "hypothesis": ...}]}``
answers ``{"scores": [...]}`` with one entailment probability per item,
order preserved. Every error is JSON ``{"error": "..."}`` on a 4xx/5xx
status; batches beyond the configured maximum get 413. Sequence pairs
are re-truncated to the model's maximum length with its own tokenizer.
"""

from __future__ import annotations

import json
from pathlib import Path

import torch
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel
from transformers import AutoModelForSequenceClassification, AutoTokenizer


class ScoreItem(BaseModel):
    premise: str
    hypothesis: str


class ScoreBody(BaseModel):
    items: list[ScoreItem]


class ScoringModel:
    """Immutable-after-load wrapper around one trained artifact."""

    def __init__(self, model_dir: str | Path, max_seq_len: int | None = None):
        model_dir = Path(model_dir)
        self.tokenizer = AutoTokenizer.from_pretrained(str(model_dir))
        self.model = AutoModelForSequenceClassification.from_pretrained(str(model_dir))
        self.model.eval()
        artifact = {}
        artifact_file = model_dir / "artifact.json"
        if artifact_file.is_file():
            artifact = json.loads(artifact_file.read_text(encoding="utf-8"))
        self.max_seq_len = max_seq_len or artifact.get("hyperparameters", {}).get(
            "max_seq_len", 512
        )

    @torch.no_grad()
    def score(self, items: list[ScoreItem], batch_size: int = 32) -> list[float]:
        scores: list[float] = []
        for start in range(0, len(items), batch_size):
            batch = items[start : start + batch_size]
            encoded = self.tokenizer(
                [item.premise for item in batch],
                [item.hypothesis for item in batch],
                truncation=True,
                max_length=self.max_seq_len,
                padding=True,
                return_tensors="pt",
            )
            logits = self.model(**encoded).logits
            scores.extend(torch.softmax(logits, dim=-1)[:, 1].tolist())
        return scores


def create_app(model_dir: str | Path, max_batch: int = 1024) -> FastAPI:
    scoring = ScoringModel(model_dir)
    app = FastAPI(title="entailment scorer")

    @app.exception_handler(RequestValidationError)
    async def validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc.errors()[:3])})

    @app.exception_handler(Exception)
    async def internal_error(request: Request, exc: Exception):
        return JSONResponse(status_code=500, content={"error": str(exc)})

    @app.post("/score")
    async def score(body: ScoreBody):
        if not body.items:
            return JSONResponse(status_code=400, content={"error": "items must be non-empty"})
        if len(body.items) > max_batch:
            return JSONResponse(
                status_code=413,
                content={"error": f"batch of {len(body.items)} exceeds maximum {max_batch}"},
            )
        return {"scores": scoring.score(body.items)}

    return app


def serve(model_dir: str | Path, port: int, host: str = "127.0.0.1", max_batch: int = 1024):
    import uvicorn

    uvicorn.run(create_app(model_dir, max_batch=max_batch), host=host, port=port)

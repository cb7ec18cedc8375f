"""Training-file loading.

The instances file is JSON Lines with fields ``paper_id, premise, task,
dataset, metric, label`` (label boolean). Hypotheses are rendered as
``task : dataset : metric``, matching the form the serving endpoint
receives. Any schema violation is a hard error naming the line.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

REQUIRED_FIELDS = ("paper_id", "premise", "task", "dataset", "metric", "label")
TEXT_FIELDS = ("paper_id", "premise", "task", "dataset", "metric")


class SchemaError(ValueError):
    """The instances file violates the expected record schema."""


@dataclass(frozen=True)
class TrainingPair:
    premise: str
    hypothesis: str
    label: int


def render_hypothesis(task: str, dataset: str, metric: str) -> str:
    return f"{task} : {dataset} : {metric}"


def read_instances(path: str | Path) -> list[TrainingPair]:
    """Load and validate the instances file."""
    pairs: list[TrainingPair] = []
    with open(path, encoding="utf-8") as fp:
        for lineno, line in enumerate(fp, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"line {lineno}: invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise SchemaError(f"line {lineno}: record must be a JSON object")
            missing = [f for f in REQUIRED_FIELDS if f not in record]
            if missing:
                raise SchemaError(f"line {lineno}: missing fields {missing}")
            for field in TEXT_FIELDS:
                if not isinstance(record[field], str):
                    raise SchemaError(f"line {lineno}: field {field!r} must be a string")
            if not isinstance(record["label"], bool):
                raise SchemaError(f"line {lineno}: field 'label' must be boolean")
            pairs.append(
                TrainingPair(
                    premise=record["premise"],
                    hypothesis=render_hypothesis(
                        record["task"], record["dataset"], record["metric"]
                    ),
                    label=int(record["label"]),
                )
            )
    if not pairs:
        raise SchemaError(f"{path}: no instances found")
    return pairs

"""Pipeline configuration: one JSON file plus flag overrides; flags win."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from tdmine.doctaet import PART_NAMES, FeatureConfig


@dataclass
class PipelineConfig:
    """Everything a pipeline run needs; the single seed drives all
    randomness (fold shuffling and negative sampling)."""

    tei_dir: str = ""
    papers_file: str = ""
    evaluations_file: str = ""
    work_dir: str = "work"
    seed: int = 0
    min_papers: int = 5
    train_ratio: float = 0.7
    n_folds: int = 2
    k_false: int = 10
    threshold: float = 0.5
    scorer: str = "lexical:"
    parts: tuple[str, ...] = PART_NAMES
    total_budget: int = 512
    part_budget: int = 150
    jobs: int = 1
    fold: int | None = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f.name for f in fields(cls)}
        kwargs = {k: v for k, v in data.items() if k in known}
        if "parts" in kwargs:
            kwargs["parts"] = tuple(kwargs["parts"])
        config = cls(**kwargs)
        config.extra = {k: v for k, v in data.items() if k not in known}
        return config

    def override(self, **kwargs) -> "PipelineConfig":
        """New config with the given non-None fields replaced."""
        updates = {k: v for k, v in kwargs.items() if v is not None}
        if "parts" in updates and isinstance(updates["parts"], str):
            updates["parts"] = tuple(
                p.strip() for p in updates["parts"].split(",") if p.strip()
            )
        return replace(self, **updates)

    def feature_config(self) -> FeatureConfig:
        return FeatureConfig(
            total_budget=self.total_budget,
            part_budget=self.part_budget,
            enabled_parts=self.parts,
        )

    def work_path(self) -> Path:
        return Path(self.work_dir)

    def to_dict(self) -> dict:
        return {
            "tei_dir": self.tei_dir,
            "papers_file": self.papers_file,
            "evaluations_file": self.evaluations_file,
            "work_dir": self.work_dir,
            "seed": self.seed,
            "min_papers": self.min_papers,
            "train_ratio": self.train_ratio,
            "n_folds": self.n_folds,
            "k_false": self.k_false,
            "threshold": self.threshold,
            "scorer": self.scorer,
            "parts": list(self.parts),
            "total_budget": self.total_budget,
            "part_budget": self.part_budget,
            "jobs": self.jobs,
            "fold": self.fold,
        }

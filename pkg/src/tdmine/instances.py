"""Entailment training instance generation.

Each labeled paper yields one positive instance per gold triple and a
fixed number of negatives sampled from the training fold's candidate
label set. Negative sampling is seeded per paper so a paper's negatives
do not depend on corpus ordering or on other papers.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import IO, Iterable, Mapping, Sequence

from tdmine.corpus import LabeledPaper, TdmTriple


class InstanceError(ValueError):
    """Instance generation failure (e.g. a paper without a feature)."""


@dataclass(frozen=True)
class NliInstance:
    """One (premise, hypothesis, label) record.

    The hypothesis is always a real triple; unknown-labeled papers
    contribute negatives only.
    """

    paper_id: str
    premise: str
    hypothesis: TdmTriple
    label: bool

    def to_dict(self) -> dict:
        return {
            "paper_id": self.paper_id,
            "premise": self.premise,
            "task": self.hypothesis.task,
            "dataset": self.hypothesis.dataset,
            "metric": self.hypothesis.metric,
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NliInstance":
        return cls(
            paper_id=d["paper_id"],
            premise=d["premise"],
            hypothesis=TdmTriple(d["task"], d["dataset"], d["metric"]),
            label=bool(d["label"]),
        )


@dataclass(frozen=True)
class SamplingConfig:
    """Negative sampling knobs. The usual grid for ``k_false`` is
    10 / 50 / 100 negatives per paper."""

    k_false: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.k_false < 0:
            raise ValueError("k_false must be >= 0")


def candidate_label_set(train_corpus: Iterable[LabeledPaper]) -> list[TdmTriple]:
    """Distinct real gold triples of the training fold, sorted
    lexicographically. At inference time every one of these is scored."""
    distinct = {
        label
        for paper in train_corpus
        for label in paper.gold
        if isinstance(label, TdmTriple)
    }
    return sorted(distinct)


def _paper_rng(seed: int, paper_id: str) -> random.Random:
    # Stream keyed by (seed, paper id): stable under corpus reordering.
    return random.Random(f"{seed}\x1f{paper_id}")


def generate_instances(
    corpus_fold: Sequence[LabeledPaper],
    premises: Mapping[str, str],
    candidates: Sequence[TdmTriple],
    config: SamplingConfig,
) -> list[NliInstance]:
    """Build instances for every paper of a fold.

    Per paper: one positive per gold triple, then ``min(k_false, pool)``
    negatives drawn uniformly without replacement from ``candidates``
    minus the paper's gold set. Output is ordered by paper id, positives
    before negatives, and is a deterministic function of the seed.
    """
    instances: list[NliInstance] = []
    for paper in sorted(corpus_fold, key=lambda p: p.paper_id):
        if paper.paper_id not in premises:
            raise InstanceError(f"no feature for paper {paper.paper_id!r}")
        premise = premises[paper.paper_id]
        gold_triples = sorted(t for t in paper.gold if isinstance(t, TdmTriple))
        for triple in gold_triples:
            instances.append(NliInstance(paper.paper_id, premise, triple, True))
        gold_set = set(gold_triples)
        pool = [c for c in candidates if c not in gold_set]
        k = min(config.k_false, len(pool))
        rng = _paper_rng(config.seed, paper.paper_id)
        for triple in rng.sample(pool, k):
            instances.append(NliInstance(paper.paper_id, premise, triple, False))
    return instances


def instance_stats(instances: Sequence[NliInstance]) -> dict:
    """True/false totals plus per-paper counts."""
    per_paper: dict[str, dict[str, int]] = {}
    true_total = 0
    false_total = 0
    for inst in instances:
        entry = per_paper.setdefault(inst.paper_id, {"true": 0, "false": 0})
        if inst.label:
            entry["true"] += 1
            true_total += 1
        else:
            entry["false"] += 1
            false_total += 1
    return {
        "instances": len(instances),
        "true": true_total,
        "false": false_total,
        "papers": len(per_paper),
        "per_paper": per_paper,
    }


def write_instances_jsonl(instances: Iterable[NliInstance], fp: IO[str]) -> int:
    n = 0
    for inst in instances:
        fp.write(json.dumps(inst.to_dict(), ensure_ascii=False) + "\n")
        n += 1
    return n


def read_instances_jsonl(fp: IO[str]) -> list[NliInstance]:
    return [NliInstance.from_dict(json.loads(line)) for line in fp if line.strip()]


def instances_filename(fold_id: int, k_false: int) -> str:
    return f"instances-{fold_id}-{k_false}.jsonl"

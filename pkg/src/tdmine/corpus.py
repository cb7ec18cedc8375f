"""Distant-labeled corpus construction.

Joins parsed documents with crowdsourced leaderboard metadata, drops
labels that occur in too few papers, marks papers left without labels
as "unknown", and produces seeded train/test fold splits.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping, Sequence, Union

from tdmine.tei import Document
from tdmine.textutils import normalize_label


class CorpusError(ValueError):
    """Unrecoverable corpus construction failure."""


@dataclass(frozen=True, order=True)
class TdmTriple:
    """One (task, dataset, metric) label.

    Fields are normalized (Unicode NFC, collapsed whitespace) on
    construction and must all be non-empty; equality is exact string
    equality on the normalized fields.
    """

    task: str
    dataset: str
    metric: str

    def __post_init__(self):
        for name in ("task", "dataset", "metric"):
            value = normalize_label(getattr(self, name))
            if not value:
                raise ValueError(f"TdmTriple.{name} must be non-empty")
            object.__setattr__(self, name, value)

    def to_json(self) -> dict:
        return {"task": self.task, "dataset": self.dataset, "metric": self.metric}


class UnknownLabel:
    """Distinguished label for papers with no surviving triple.

    A singleton; never represented as a triple of empty strings.
    """

    _instance: "UnknownLabel | None" = None

    def __new__(cls) -> "UnknownLabel":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Unknown"

    def to_json(self) -> str:
        return "unknown"


UNKNOWN = UnknownLabel()

Label = Union[TdmTriple, UnknownLabel]


def label_from_json(value) -> Label:
    if value == "unknown":
        return UNKNOWN
    return TdmTriple(**value)


def label_sort_key(label: Label) -> tuple:
    """Sort key placing Unknown before all triples."""
    if isinstance(label, UnknownLabel):
        return (0, "", "", "")
    return (1, label.task, label.dataset, label.metric)


@dataclass
class LabeledPaper:
    """A document plus its gold label set.

    After filtering and unknown-assignment the gold set is either real
    triples or exactly ``{UNKNOWN}``, never a mix and never empty.
    """

    paper_id: str
    document: Document
    gold: set

    def to_dict(self) -> dict:
        return {
            "paper_id": self.paper_id,
            "document": self.document.to_dict(),
            "gold": [lab.to_json() for lab in sorted(self.gold, key=label_sort_key)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LabeledPaper":
        return cls(
            paper_id=d["paper_id"],
            document=Document.from_dict(d["document"]),
            gold={label_from_json(v) for v in d["gold"]},
        )


@dataclass
class FoldSplit:
    """One train/test partition of the corpus paper ids."""

    fold_id: int
    train_ids: set[str]
    test_ids: set[str]

    def to_dict(self) -> dict:
        return {
            "fold_id": self.fold_id,
            "train_ids": sorted(self.train_ids),
            "test_ids": sorted(self.test_ids),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FoldSplit":
        return cls(d["fold_id"], set(d["train_ids"]), set(d["test_ids"]))


# ---------------------------------------------------------------------------
# Metadata loading
# ---------------------------------------------------------------------------

_PAPER_KEY_FIELDS = ("paper_url", "paper", "url", "paper_id", "id")


def paper_key(raw: str) -> str:
    """Join key for a paper reference.

    URLs reduce to their last path segment so that metadata links match
    TEI file stems; plain ids pass through trimmed.
    """
    value = raw.strip()
    if "://" in value:
        segments = [s for s in value.split("/") if s]
        if segments:
            return segments[-1]
    return value


@dataclass
class MetadataLoad:
    """Result of joining the papers and evaluations metadata files."""

    annotations: dict[str, set[TdmTriple]]
    skipped: dict[str, int] = field(default_factory=dict)

    def _count(self, reason: str) -> None:
        self.skipped[reason] = self.skipped.get(reason, 0) + 1


def _record_key(record: Mapping) -> str | None:
    for name in _PAPER_KEY_FIELDS:
        value = record.get(name)
        if isinstance(value, str) and value.strip():
            return paper_key(value)
    return None


def load_metadata(papers_file: IO[str] | str, evaluations_file: IO[str] | str) -> MetadataLoad:
    """Join paper metadata with evaluation rows into triples per paper.

    Both inputs are JSON arrays of objects. Paper records name the paper
    (``paper_url``/``url``/``id``); evaluation records carry the paper
    link plus ``task``, ``dataset`` and ``metric`` strings. Records that
    cannot be joined or hold incomplete triples are skipped and counted;
    malformed JSON propagates as a hard error.
    """
    papers = _load_json_array(papers_file, "papers file")
    evaluations = _load_json_array(evaluations_file, "evaluations file")

    result = MetadataLoad(annotations={})
    for record in papers:
        key = _record_key(record)
        if key is None:
            result._count("papers_missing_key")
            continue
        result.annotations.setdefault(key, set())

    for record in evaluations:
        key = _record_key(record)
        if key is None:
            result._count("evaluations_missing_key")
            continue
        if key not in result.annotations:
            result._count("evaluations_unmatched_paper")
            continue
        try:
            triple = TdmTriple(
                task=str(record.get("task", "")),
                dataset=str(record.get("dataset", "")),
                metric=str(record.get("metric", "")),
            )
        except ValueError:
            result._count("evaluations_incomplete_triple")
            continue
        result.annotations[key].add(triple)
    return result


def _load_json_array(source: IO[str] | str, what: str) -> list:
    if isinstance(source, str):
        with open(source, encoding="utf-8") as fp:
            data = json.load(fp)
    else:
        data = json.load(source)
    if not isinstance(data, list):
        raise CorpusError(f"{what} must be a JSON array of objects")
    return data


# ---------------------------------------------------------------------------
# Corpus assembly
# ---------------------------------------------------------------------------


def build_corpus(
    documents: Iterable[Document], annotations: Mapping[str, set[TdmTriple]]
) -> tuple[list[LabeledPaper], dict[str, int]]:
    """Join documents with annotations, keeping papers present in both.

    Returns the corpus sorted by paper id plus drop counts for papers
    missing on either side.
    """
    docs_by_id: dict[str, Document] = {}
    for doc in documents:
        docs_by_id[doc.paper_id] = doc
    report = {
        "papers_without_document": 0,
        "documents_without_metadata": 0,
    }
    corpus = []
    for pid in sorted(annotations):
        doc = docs_by_id.get(pid)
        if doc is None:
            report["papers_without_document"] += 1
            continue
        corpus.append(LabeledPaper(paper_id=pid, document=doc, gold=set(annotations[pid])))
    report["documents_without_metadata"] = len(
        set(docs_by_id) - set(annotations)
    )
    return corpus, report


def filter_rare_labels(corpus: list[LabeledPaper], min_papers: int = 5) -> list[LabeledPaper]:
    """Drop triples occurring in fewer than ``min_papers`` papers.

    Occurrences are counted once on the input corpus (single pass, not to
    a fixpoint), then every gold set is pruned against that count.
    """
    if min_papers < 1:
        raise ValueError("min_papers must be >= 1")
    counts: dict[TdmTriple, int] = {}
    for paper in corpus:
        for label in paper.gold:
            if isinstance(label, TdmTriple):
                counts[label] = counts.get(label, 0) + 1
    out = []
    for paper in corpus:
        kept = {
            label
            for label in paper.gold
            if not isinstance(label, TdmTriple) or counts[label] >= min_papers
        }
        out.append(LabeledPaper(paper.paper_id, paper.document, kept))
    return out


def assign_unknown(corpus: list[LabeledPaper]) -> list[LabeledPaper]:
    """Give papers whose gold set emptied out the distinguished Unknown label."""
    out = []
    for paper in corpus:
        gold = set(paper.gold) if paper.gold else {UNKNOWN}
        out.append(LabeledPaper(paper.paper_id, paper.document, gold))
    return out


# ---------------------------------------------------------------------------
# Fold splitting
# ---------------------------------------------------------------------------


def _round_half_up(x: float) -> int:
    return int(x + 0.5)


def split_folds(
    corpus: Sequence[LabeledPaper] | Sequence[str],
    train_ratio: float = 0.7,
    n_folds: int = 2,
    seed: int = 0,
) -> list[FoldSplit]:
    """Partition paper ids into ``n_folds`` seeded train/test splits.

    Each fold shuffles the sorted ids with its own stream derived from
    the seed and takes the first ``train_ratio`` share as train. Test
    sets are forced pairwise non-identical by deterministic reshuffling.
    """
    ids = sorted(p if isinstance(p, str) else p.paper_id for p in corpus)
    if len(ids) < 10:
        raise CorpusError(f"corpus too small to split: {len(ids)} papers (need >= 10)")
    if len(set(ids)) != len(ids):
        raise CorpusError("duplicate paper ids in corpus")
    train_size = _round_half_up(train_ratio * len(ids))

    splits: list[FoldSplit] = []
    seen_tests: list[frozenset[str]] = []
    for fold_id in range(n_folds):
        for attempt in range(1000):
            rng = random.Random(f"{seed}:{fold_id}:{attempt}")
            shuffled = ids[:]
            rng.shuffle(shuffled)
            test = frozenset(shuffled[train_size:])
            if test not in seen_tests:
                break
        else:
            raise CorpusError("could not produce distinct test folds")
        seen_tests.append(test)
        splits.append(
            FoldSplit(
                fold_id=fold_id,
                train_ids=set(shuffled[:train_size]),
                test_ids=set(test),
            )
        )
    return splits


# ---------------------------------------------------------------------------
# Corpus statistics
# ---------------------------------------------------------------------------


def _subset_stats(papers: list[LabeledPaper]) -> dict:
    """Statistics for one corpus subset.

    The triples-per-paper average is taken over papers that actually
    carry triples; unknown-labeled papers do not enter the denominator.
    """
    unknown = sum(1 for p in papers if p.gold == {UNKNOWN})
    triples = [lab for p in papers for lab in p.gold if isinstance(lab, TdmTriple)]
    labeled_papers = len(papers) - unknown
    distinct = set(triples)
    return {
        "papers": len(papers),
        "unknown_papers": unknown,
        "total_triples": len(triples),
        "avg_triples_per_paper": (len(triples) / labeled_papers) if labeled_papers else 0.0,
        "distinct_triples": len(distinct),
        "distinct_tasks": len({t.task for t in distinct}),
        "distinct_datasets": len({t.dataset for t in distinct}),
        "distinct_metrics": len({t.metric for t in distinct}),
    }


def corpus_stats(corpus: list[LabeledPaper], splits: list[FoldSplit]) -> dict:
    """Corpus statistics overall and per fold (train/test), plus the
    across-fold average of each train/test cell."""
    by_id = {p.paper_id: p for p in corpus}
    per_fold = []
    for split in splits:
        per_fold.append(
            {
                "fold_id": split.fold_id,
                "train": _subset_stats([by_id[i] for i in sorted(split.train_ids)]),
                "test": _subset_stats([by_id[i] for i in sorted(split.test_ids)]),
            }
        )
    average = {}
    if per_fold:
        for part in ("train", "test"):
            keys = per_fold[0][part].keys()
            average[part] = {
                k: sum(f[part][k] for f in per_fold) / len(per_fold) for k in keys
            }
    return {"overall": _subset_stats(corpus), "folds": per_fold, "average": average}


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def write_corpus_jsonl(corpus: Iterable[LabeledPaper], fp: IO[str]) -> int:
    n = 0
    for paper in corpus:
        fp.write(json.dumps(paper.to_dict(), ensure_ascii=False) + "\n")
        n += 1
    return n


def read_corpus_jsonl(fp: IO[str]) -> list[LabeledPaper]:
    return [LabeledPaper.from_dict(json.loads(line)) for line in fp if line.strip()]

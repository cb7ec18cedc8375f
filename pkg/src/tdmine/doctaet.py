"""Context feature assembly.

Builds the four-part context string used as the entailment premise for
a paper: title, abstract, the opening of the experimental-setup section,
and table captions/content. Each optional part is capped at its own token
budget before the combined string is trimmed to the total budget.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from tdmine.tei import Document, TableInfo
from tdmine.textutils import normalize_ws

PART_NAMES = ("title", "abstract", "exp_setup", "table_info")

DEFAULT_EXP_SETUP_PATTERNS = (
    "experiment",
    "experimental setup",
    "evaluation setup",
    "setup",
    "training details",
)


@dataclass(frozen=True)
class FeatureConfig:
    """Budgets and part selection for feature assembly.

    ``title`` and ``abstract`` are always enabled; ``part_budget`` caps
    each of the two optional parts, ``total_budget`` caps the combined
    string.
    """

    total_budget: int = 512
    part_budget: int = 150
    enabled_parts: tuple[str, ...] = PART_NAMES
    exp_setup_patterns: tuple[str, ...] = DEFAULT_EXP_SETUP_PATTERNS

    def __post_init__(self):
        if self.total_budget < 1:
            raise ValueError("total_budget must be >= 1")
        if self.part_budget < 0:
            raise ValueError("part_budget must be >= 0")
        unknown = set(self.enabled_parts) - set(PART_NAMES)
        if unknown:
            raise ValueError(f"unknown feature parts: {sorted(unknown)}")
        if "title" not in self.enabled_parts or "abstract" not in self.enabled_parts:
            raise ValueError("title and abstract are always enabled")

    def fingerprint(self) -> str:
        """Short stable digest identifying this configuration."""
        payload = json.dumps(
            {
                "total_budget": self.total_budget,
                "part_budget": self.part_budget,
                "enabled_parts": sorted(self.enabled_parts),
                "exp_setup_patterns": list(self.exp_setup_patterns),
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


@dataclass
class DocTaetFeature:
    """The assembled context feature.

    The four parts are stored after per-part truncation and part
    selection; ``combined`` is their space-joined concatenation in fixed
    order, trimmed to the total budget.
    """

    title: str
    abstract: str
    exp_setup: str
    table_info: str
    combined: str

    def parts(self) -> dict[str, str]:
        return {
            "title": self.title,
            "abstract": self.abstract,
            "exp_setup": self.exp_setup,
            "table_info": self.table_info,
        }


def truncate(text: str, budget: int) -> str:
    """First ``budget`` whitespace tokens, rejoined by single spaces."""
    return " ".join(text.split()[:budget])


def extract_exp_setup(
    document: Document, patterns: tuple[str, ...] = DEFAULT_EXP_SETUP_PATTERNS
) -> str:
    """Body of the first section whose heading matches a setup pattern
    (case-insensitive containment); empty string when none matches."""
    lowered = [p.lower() for p in patterns]
    for heading, body in document.sections:
        head = heading.lower()
        if any(p in head for p in lowered):
            return body
    return ""


def serialize_tables(tables: list[TableInfo]) -> str:
    """Captions and cells of all tables in order, space-joined."""
    pieces: list[str] = []
    for table in tables:
        if table.caption:
            pieces.append(table.caption)
        for row in table.cells:
            pieces.extend(cell for cell in row if cell)
    return normalize_ws(" ".join(pieces))


def build_feature(document: Document, config: FeatureConfig = FeatureConfig()) -> DocTaetFeature:
    """Assemble the context feature for one document.

    Optional parts are truncated to ``part_budget`` and dropped entirely
    when not enabled; the combined string is trimmed to ``total_budget``
    from the tail, so table content is the first to go.
    """
    title = normalize_ws(document.title)
    abstract = normalize_ws(document.abstract)
    exp_setup = ""
    table_info = ""
    if "exp_setup" in config.enabled_parts:
        exp_setup = truncate(
            extract_exp_setup(document, config.exp_setup_patterns), config.part_budget
        )
    if "table_info" in config.enabled_parts:
        table_info = truncate(serialize_tables(document.tables), config.part_budget)
    assembled = " ".join(p for p in (title, abstract, exp_setup, table_info) if p)
    combined = truncate(assembled, config.total_budget)
    return DocTaetFeature(
        title=title,
        abstract=abstract,
        exp_setup=exp_setup,
        table_info=table_info,
        combined=combined,
    )


@dataclass
class FeatureRecord:
    """One line of the features file: the feature plus provenance."""

    paper_id: str
    feature: DocTaetFeature
    config_fingerprint: str

    def to_dict(self) -> dict:
        d = {"paper_id": self.paper_id}
        d.update(self.feature.parts())
        d["combined"] = self.feature.combined
        d["config_fingerprint"] = self.config_fingerprint
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureRecord":
        feature = DocTaetFeature(
            title=d["title"],
            abstract=d["abstract"],
            exp_setup=d["exp_setup"],
            table_info=d["table_info"],
            combined=d["combined"],
        )
        return cls(d["paper_id"], feature, d["config_fingerprint"])


TABLE_ABLATION_PART_SETS: tuple[tuple[str, ...], ...] = (
    ("title", "abstract"),
    ("title", "abstract", "exp_setup"),
    ("title", "abstract", "table_info"),
    ("title", "abstract", "exp_setup", "table_info"),
)


def ablation_configs(base: FeatureConfig = FeatureConfig()) -> list[FeatureConfig]:
    """The four standard part-subset configurations, smallest first."""
    return [
        FeatureConfig(
            total_budget=base.total_budget,
            part_budget=base.part_budget,
            enabled_parts=parts,
            exp_setup_patterns=base.exp_setup_patterns,
        )
        for parts in TABLE_ABLATION_PART_SETS
    ]


def parts_label(parts: tuple[str, ...]) -> str:
    """Human-readable row label for a part subset."""
    display = {
        "title": "Title",
        "abstract": "Abstract",
        "exp_setup": "ExpSetup",
        "table_info": "TableInfo",
    }
    return " + ".join(display[p] for p in PART_NAMES if p in parts)

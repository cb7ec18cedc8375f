"""Leaderboard mining pipeline: distant-labeled corpus construction,
context-feature extraction, entailment-style triple scoring, and
micro/macro multi-label evaluation."""

__version__ = "0.1.0"

from tdmine.corpus import UNKNOWN, LabeledPaper, TdmTriple
from tdmine.tei import Document, TableInfo

__all__ = [
    "Document",
    "TableInfo",
    "TdmTriple",
    "LabeledPaper",
    "UNKNOWN",
    "__version__",
]

"""Shared text helpers: whitespace normalization and word tokenization.

A "token" throughout this package is a maximal run of non-whitespace
characters. This is a model-independent proxy; model-specific subword
tokenization lives behind the scorer boundary.
"""

from __future__ import annotations

import re
import unicodedata

_WS_RE = re.compile(r"\s+")


def normalize_ws(text: str) -> str:
    """Collapse whitespace runs to single spaces and trim the ends."""
    return _WS_RE.sub(" ", text).strip()


def normalize_label(text: str) -> str:
    """Normalize a label string: Unicode NFC plus whitespace collapsing."""
    return normalize_ws(unicodedata.normalize("NFC", text))


def tokens(text: str) -> list[str]:
    """Split into whitespace-delimited tokens."""
    return text.split()


def token_count(text: str) -> int:
    return len(text.split())

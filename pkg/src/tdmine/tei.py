"""TEI XML ingestion.

Parses the TEI output of an external PDF-to-XML converter into a
structured :class:`Document` (title, abstract, sections, tables). Tag
matching ignores XML namespaces so both namespaced and plain TEI parse
the same way.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
import xml.parsers.expat
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

from tdmine.textutils import normalize_ws


class TeiParseError(ValueError):
    """Malformed XML input; carries the byte offset of the failure."""

    def __init__(self, message: str, byte_offset: int | None = None):
        super().__init__(message)
        self.byte_offset = byte_offset


@dataclass
class TableInfo:
    """One table: caption plus a row-major cell grid (rows may be ragged)."""

    caption: str = ""
    cells: list[list[str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"caption": self.caption, "cells": self.cells}

    @classmethod
    def from_dict(cls, d: dict) -> "TableInfo":
        return cls(caption=d["caption"], cells=[list(r) for r in d["cells"]])


@dataclass
class Document:
    """Structured article parsed from TEI.

    ``title`` and ``abstract`` may be empty strings but are never absent;
    ``sections`` is an ordered list of (heading, body) pairs in source order.
    """

    paper_id: str
    title: str = ""
    abstract: str = ""
    sections: list[tuple[str, str]] = field(default_factory=list)
    tables: list[TableInfo] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "paper_id": self.paper_id,
            "title": self.title,
            "abstract": self.abstract,
            "sections": [{"heading": h, "body": b} for h, b in self.sections],
            "tables": [t.to_dict() for t in self.tables],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Document":
        return cls(
            paper_id=d["paper_id"],
            title=d["title"],
            abstract=d["abstract"],
            sections=[(s["heading"], s["body"]) for s in d["sections"]],
            tables=[TableInfo.from_dict(t) for t in d["tables"]],
        )


def _local(tag) -> str:
    """Tag name without its namespace prefix."""
    if not isinstance(tag, str):
        return ""
    return tag.rsplit("}", 1)[-1]


def _text_of(elem: ET.Element | None) -> str:
    """All descendant text of an element, whitespace-normalized.

    Inline markup (formulas, references, highlights) contributes its plain
    text content; empty inline elements vanish.
    """
    if elem is None:
        return ""
    return normalize_ws("".join(elem.itertext()))


def _find_first(root: ET.Element, *path: str) -> ET.Element | None:
    """First element reached by following ``path`` of local names, each
    step matching the first descendant of the previous match."""
    node: ET.Element | None = root
    for name in path:
        found = None
        for el in node.iter():
            if el is not node and _local(el.tag) == name:
                found = el
                break
        if found is None:
            return None
        node = found
    return node


def _iter_local(elem: ET.Element, name: str) -> Iterator[ET.Element]:
    for node in elem.iter():
        if _local(node.tag) == name:
            yield node


def _byte_offset_of_error(data: bytes) -> int | None:
    """Re-parse with expat purely to recover the exact error byte index."""
    parser = xml.parsers.expat.ParserCreate()
    try:
        parser.Parse(data, True)
    except xml.parsers.expat.ExpatError:
        return parser.ErrorByteIndex
    return None


def _collect_sections(div: ET.Element, out: list[tuple[str, str]]) -> None:
    """Flatten nested divisions depth-first into (heading, body) pairs.

    A division contributes a section when it is a leaf or carries its own
    paragraph content; child divisions follow in source order.
    """
    heading = ""
    body_parts: list[str] = []
    child_divs: list[ET.Element] = []
    for child in div:
        name = _local(child.tag)
        if name == "head":
            heading = _text_of(child)
        elif name in ("p", "formula"):
            text = _text_of(child)
            if text:
                body_parts.append(text)
        elif name == "div":
            child_divs.append(child)
    if body_parts or not child_divs:
        out.append((heading, " ".join(body_parts)))
    for sub in child_divs:
        _collect_sections(sub, out)


def _parse_table_figure(figure: ET.Element) -> TableInfo:
    caption = ""
    head_text = ""
    cells: list[list[str]] = []
    for child in figure:
        name = _local(child.tag)
        if name == "figDesc":
            caption = _text_of(child)
        elif name == "head":
            head_text = _text_of(child)
        elif name == "table":
            for row in _iter_local(child, "row"):
                cells.append([_text_of(c) for c in row if _local(c.tag) == "cell"])
    return TableInfo(caption=caption or head_text, cells=cells)


def parse_tei(data: bytes | str, paper_id: str) -> Document:
    """Parse TEI XML bytes into a Document.

    Missing title/abstract yield empty strings; malformed XML raises
    :class:`TeiParseError` with the byte offset of the first error.
    """
    if isinstance(data, str):
        data = data.encode("utf-8")
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise TeiParseError(
            f"malformed TEI XML: {exc}", byte_offset=_byte_offset_of_error(data)
        ) from exc

    title_el = _find_first(root, "teiHeader", "titleStmt", "title")
    if title_el is None:
        title_el = _find_first(root, "title")
    title = _text_of(title_el)

    abstract_el = _find_first(root, "abstract")
    if abstract_el is not None:
        paragraphs = [_text_of(p) for p in _iter_local(abstract_el, "p")]
        paragraphs = [p for p in paragraphs if p]
        abstract = " ".join(paragraphs) if paragraphs else _text_of(abstract_el)
    else:
        abstract = ""

    sections: list[tuple[str, str]] = []
    body = _find_first(root, "body")
    if body is not None:
        for child in body:
            if _local(child.tag) == "div":
                _collect_sections(child, sections)

    tables = [
        _parse_table_figure(fig)
        for fig in _iter_local(root, "figure")
        if fig.get("type") == "table"
    ]

    return Document(
        paper_id=paper_id,
        title=title,
        abstract=abstract,
        sections=sections,
        tables=tables,
    )


def write_documents_jsonl(documents: Iterable[Document], fp: IO[str]) -> int:
    """Write one JSON object per line; returns the number written."""
    n = 0
    for doc in documents:
        fp.write(json.dumps(doc.to_dict(), ensure_ascii=False) + "\n")
        n += 1
    return n


def read_documents_jsonl(fp: IO[str]) -> list[Document]:
    return [Document.from_dict(json.loads(line)) for line in fp if line.strip()]

"""Stage manifests and atomic file writes.

Every pipeline stage writes its outputs to a temp file followed by an
atomic rename, then records a manifest naming the digests of its inputs,
its configuration, and the digests of its outputs. Because a stage's
input digests are the producing stage's output digests, the manifests
chain into a verifiable lineage for a run.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Mapping


class MissingPrerequisite(FileNotFoundError):
    """A stage input that an earlier stage (or the user) must provide."""

    def __init__(self, path: Path | str, hint: str = ""):
        message = f"missing prerequisite: {path}"
        if hint:
            message += f" ({hint})"
        super().__init__(message)
        self.path = str(path)


def require_file(path: Path, hint: str = "") -> Path:
    if not path.is_file():
        raise MissingPrerequisite(path, hint)
    return path


def require_dir(path: Path, hint: str = "") -> Path:
    if not path.is_dir():
        raise MissingPrerequisite(path, hint)
    return path


def file_digest(path: Path | str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fp:
        for chunk in iter(lambda: fp.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def tree_digest(paths: list[Path]) -> str:
    """Combined digest over a list of files (names and contents)."""
    h = hashlib.sha256()
    for path in sorted(paths):
        h.update(path.name.encode("utf-8"))
        h.update(bytes.fromhex(file_digest(path)))
    return h.hexdigest()


def atomic_write_bytes(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fp:
            fp.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def write_stage_manifest(
    work_dir: Path,
    stage: str,
    version: str,
    config: Mapping,
    inputs: Mapping[str, Path | dict],
    outputs: Mapping[str, Path],
) -> Path:
    """Record a stage's lineage next to its outputs."""
    manifest = {
        "stage": stage,
        "version": version,
        "config": dict(config),
        "inputs": {
            name: (
                value
                if isinstance(value, dict)
                else {"path": str(value), "sha256": file_digest(value)}
            )
            for name, value in inputs.items()
        },
        "outputs": {
            name: {"path": str(path), "sha256": file_digest(path)}
            for name, path in outputs.items()
        },
    }
    path = work_dir / f"{stage}.manifest.json"
    atomic_write_text(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path

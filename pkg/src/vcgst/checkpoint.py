"""Versioned parameter checkpoints: named float64 tensors in an .npz file.

Round-trips are bit-exact (raw IEEE-754 payloads inside the archive).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DataError

FORMAT_VERSION = 1
_META_KEY = "__checkpoint_meta__"


def save_tensors(path, tensors: dict[str, np.ndarray],
                 meta: dict | None = None) -> None:
    """Write named arrays plus a JSON metadata blob."""
    payload = {name: np.asarray(arr) for name, arr in tensors.items()}
    header = {"format_version": FORMAT_VERSION, "meta": meta or {}}
    payload[_META_KEY] = np.frombuffer(
        json.dumps(header, sort_keys=True).encode("utf-8"), dtype=np.uint8)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        np.savez(fh, **payload)


def load_tensors(path) -> tuple[dict[str, np.ndarray], dict]:
    """Read back (tensors, meta); raises DataError on version mismatch."""
    with np.load(Path(path)) as archive:
        if _META_KEY not in archive:
            raise DataError(f"{path}: not a checkpoint file")
        header = json.loads(bytes(archive[_META_KEY]).decode("utf-8"))
        if header.get("format_version") != FORMAT_VERSION:
            raise DataError(
                f"{path}: unsupported checkpoint version "
                f"{header.get('format_version')!r}")
        tensors = {k: archive[k] for k in archive.files if k != _META_KEY}
    return tensors, header.get("meta", {})

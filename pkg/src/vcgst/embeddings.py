"""Per-period embedding tables: node id -> d-vector, checkpointable."""

from __future__ import annotations

import numpy as np

from .checkpoint import load_tensors, save_tensors
from .errors import DimensionMismatch, MissingEmbedding


class EmbeddingTable:
    """Dense (N, d) matrix with a stable id -> row mapping."""

    def __init__(self, period: int, d: int):
        self.period = period
        self.d = d
        self.ids: list[str] = []
        self.index: dict[str, int] = {}
        self.matrix = np.zeros((0, d))

    def __contains__(self, node: str) -> bool:
        return node in self.index

    def __len__(self) -> int:
        return len(self.ids)

    def row(self, node: str) -> np.ndarray:
        i = self.index.get(node)
        if i is None:
            raise MissingEmbedding(f"node {node!r} not in period "
                                   f"{self.period} table")
        return self.matrix[i]

    def get(self, node: str, default=None):
        i = self.index.get(node)
        return default if i is None else self.matrix[i]

    def add_rows(self, ids: list[str], rows: np.ndarray) -> None:
        if rows.shape != (len(ids), self.d):
            raise DimensionMismatch(
                f"rows {rows.shape} for {len(ids)} ids of dim {self.d}")
        for node in ids:
            if node in self.index:
                raise MissingEmbedding(f"node {node!r} already present")
            self.index[node] = len(self.ids)
            self.ids.append(node)
        self.matrix = np.concatenate([self.matrix, rows], axis=0) \
            if len(self.matrix) else rows.copy()

    def set_rows(self, ids: list[str], rows: np.ndarray) -> None:
        idx = np.array([self.index[n] for n in ids], dtype=np.int64)
        self.matrix[idx] = rows

    def copy(self, period: int | None = None) -> "EmbeddingTable":
        out = EmbeddingTable(self.period if period is None else period,
                             self.d)
        out.ids = list(self.ids)
        out.index = dict(self.index)
        out.matrix = self.matrix.copy()
        return out

    def save(self, path) -> None:
        save_tensors(path, {"matrix": self.matrix},
                     meta={"period": self.period, "d": self.d,
                           "ids": self.ids})

    @classmethod
    def load(cls, path) -> "EmbeddingTable":
        tensors, meta = load_tensors(path)
        table = cls(int(meta["period"]), int(meta["d"]))
        table.ids = list(meta["ids"])
        table.index = {n: i for i, n in enumerate(table.ids)}
        table.matrix = tensors["matrix"]
        return table

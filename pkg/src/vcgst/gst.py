"""Graph self-attention layers.

Each layer updates a target node by attending over its neighbors with
multi-head scaled dot products, aggregating the head-weighted value
slices through a mixing matrix, concatenating with the node's own state,
and adding a residual. With all weights at zero the layer is the identity
map. Per-edge attention weights are exposed for interpretability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .errors import DimensionMismatch, MissingEmbedding
from .optim import glorot


class GstLayerParams:
    """One attention layer: key/query/value maps, head mixer, update map.

    Key, query and value projections run at full width d and are sliced
    into `heads` blocks of d // heads columns; the mixer is therefore
    square (d x d) and the update map is (d x 2d).
    """

    def __init__(self, w_key, w_query, w_value, w_mix, w_update, heads: int,
                 prefix: str = "gst"):
        d = w_key.shape[0]
        if d % heads != 0:
            raise DimensionMismatch(f"d={d} not divisible by heads={heads}")
        self.d = d
        self.heads = heads
        self.W_K = ad.Parameter(w_key, f"{prefix}/W_K")
        self.W_Q = ad.Parameter(w_query, f"{prefix}/W_Q")
        self.W_V = ad.Parameter(w_value, f"{prefix}/W_V")
        self.W_info = ad.Parameter(w_mix, f"{prefix}/W_info")
        self.W_A = ad.Parameter(w_update, f"{prefix}/W_A")

    @classmethod
    def init(cls, rng: np.random.Generator, d: int, heads: int,
             prefix: str = "gst") -> "GstLayerParams":
        return cls(glorot(rng, d, d), glorot(rng, d, d), glorot(rng, d, d),
                   glorot(rng, d, d), glorot(rng, d, 2 * d), heads, prefix)

    @classmethod
    def zeros(cls, d: int, heads: int, prefix: str = "gst"):
        return cls(np.zeros((d, d)), np.zeros((d, d)), np.zeros((d, d)),
                   np.zeros((d, d)), np.zeros((d, 2 * d)), heads, prefix)

    def parameters(self) -> list[ad.Parameter]:
        return [self.W_K, self.W_Q, self.W_V, self.W_info, self.W_A]


class GstStack:
    """An ordered pile of attention layers sharing d and head count."""

    def __init__(self, layers: list[GstLayerParams],
                 scale_full_width: bool = False):
        if not layers:
            raise DimensionMismatch("a stack needs at least one layer")
        self.layers = layers
        self.d = layers[0].d
        self.heads = layers[0].heads
        self.scale_full_width = scale_full_width

    @classmethod
    def init(cls, rng, n_layers: int, d: int, heads: int,
             prefix: str = "gst", scale_full_width: bool = False):
        layers = [GstLayerParams.init(rng, d, heads, f"{prefix}/layer{i}")
                  for i in range(n_layers)]
        return cls(layers, scale_full_width)

    @classmethod
    def zeros(cls, n_layers: int, d: int, heads: int, prefix: str = "gst"):
        return cls([GstLayerParams.zeros(d, heads, f"{prefix}/layer{i}")
                    for i in range(n_layers)])

    def __len__(self) -> int:
        return len(self.layers)

    def parameters(self) -> list[ad.Parameter]:
        return [p for layer in self.layers for p in layer.parameters()]

    def inv_scale(self) -> float:
        width = self.d if self.scale_full_width else self.d // self.heads
        return 1.0 / math.sqrt(width)

    def to_tensors(self) -> dict[str, np.ndarray]:
        return {p.name: p.data for p in self.parameters()}

    def load_tensors(self, tensors: dict[str, np.ndarray]) -> None:
        for p in self.parameters():
            p.data[...] = tensors[p.name]


@dataclass(frozen=True)
class AttentionRecord:
    target: str
    source: str
    layer: int
    head: int
    score: float


@dataclass
class Workspace:
    """Edge segments for one batched stack application.

    Workspace rows 0..T-1 are the targets (in `target_ids` order) and the
    remaining rows are frozen context nodes; `src` holds per-edge source
    row indices grouped by target via `ptr`.
    """

    target_ids: list[str]
    frozen_ids: list[str]
    src: np.ndarray
    ptr: np.ndarray

    @property
    def n_targets(self) -> int:
        return len(self.target_ids)


def build_workspace(target_ids: list[str], neighbor_fn) -> Workspace:
    """Assemble edge segments from a neighbor function.

    Neighbor lists are deduplicated preserving order; neighbors that are
    not themselves targets become frozen context rows.
    """
    index = {n: i for i, n in enumerate(target_ids)}
    frozen_ids: list[str] = []
    src: list[int] = []
    ptr = [0]
    for node in target_ids:
        seen = set()
        for nbr in neighbor_fn(node):
            if nbr in seen:
                continue
            seen.add(nbr)
            row = index.get(nbr)
            if row is None:
                row = len(target_ids) + len(frozen_ids)
                index[nbr] = row
                frozen_ids.append(nbr)
            src.append(row)
        ptr.append(len(src))
    return Workspace(target_ids=list(target_ids), frozen_ids=frozen_ids,
                     src=np.asarray(src, dtype=np.int64),
                     ptr=np.asarray(ptr, dtype=np.int64))


def stack_apply(stack: GstStack, h_targets: ad.Tensor, h_frozen: ad.Tensor,
                ws: Workspace, collect_attention: bool = False):
    """Run every layer over the workspace targets (tape-recorded).

    Returns (updated target rows (T, d), per-layer attention probability
    arrays (E, heads) when requested). Frozen rows are read every layer
    but never rewritten, matching the contract that only targets change.
    """
    inv_scale = stack.inv_scale()
    probs_layers: list[np.ndarray] = []
    cur = h_targets
    for layer in stack.layers:
        h_all = ad.concat(cur, h_frozen, axis=0) \
            if h_frozen.shape[0] else cur
        k = ad.matmul(h_all, ad.transpose(layer.W_K))
        v = ad.matmul(h_all, ad.transpose(layer.W_V))
        q = ad.matmul(cur, ad.transpose(layer.W_Q))
        agg, probs = ad.edge_attention(k, q, v, ws.src, ws.ptr,
                                       layer.heads, inv_scale)
        if collect_attention:
            probs_layers.append(probs)
        info = ad.matmul(agg, ad.transpose(layer.W_info))
        cat = ad.concat(cur, info, axis=1)
        cur = ad.add(ad.matmul(cat, ad.transpose(layer.W_A)), cur)
    return cur, probs_layers


def _gather_rows(embeddings, ids: list[str], d: int) -> np.ndarray:
    rows = np.zeros((len(ids), d))
    for i, node in enumerate(ids):
        vec = embeddings.get(node) if hasattr(embeddings, "get") \
            else embeddings[node]
        if vec is None:
            raise MissingEmbedding(f"no embedding for node {node!r}")
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (d,):
            raise DimensionMismatch(
                f"embedding of {node!r} has shape {vec.shape}, want ({d},)")
        rows[i] = vec
    return rows


def records_from_probs(ws: Workspace, probs_layers: list[np.ndarray]
                       ) -> list[AttentionRecord]:
    all_ids = ws.target_ids + ws.frozen_ids
    records = []
    for layer_idx, probs in enumerate(probs_layers):
        for t, target in enumerate(ws.target_ids):
            for e in range(ws.ptr[t], ws.ptr[t + 1]):
                source = all_ids[ws.src[e]]
                for head in range(probs.shape[1]):
                    records.append(AttentionRecord(
                        target=target, source=source, layer=layer_idx,
                        head=head, score=float(probs[e, head])))
    return records


def gst_forward(stack: GstStack, embeddings, targets, neighbor_fn,
                record_attention: bool = False):
    """Functional stack application over an embedding mapping.

    `embeddings` is any mapping-like object with get(node) -> vector;
    `targets` may be any iterable (evaluated in sorted order for
    determinism). Returns (dict target -> updated vector, attention
    records; empty list unless requested).
    """
    target_ids = sorted(targets)
    ws = build_workspace(target_ids, neighbor_fn)
    h_tgt = _gather_rows(embeddings, ws.target_ids, stack.d)
    h_frz = _gather_rows(embeddings, ws.frozen_ids, stack.d)
    with ad.no_grad():
        out, probs_layers = stack_apply(
            stack, ad.constant(h_tgt), ad.constant(h_frz), ws,
            collect_attention=record_attention)
    updated = {node: out.data[i].copy()
               for i, node in enumerate(ws.target_ids)}
    records = records_from_probs(ws, probs_layers) if record_attention \
        else []
    return updated, records


def isolated_node_update(stack: GstStack, embeddings, node: str
                         ) -> np.ndarray:
    """Stack update for a node with no neighbors: the neighbor
    aggregation is the zero vector and only the self/residual path acts."""
    updated, _ = gst_forward(stack, embeddings, [node], lambda _n: ())
    return updated[node]


def top_attention_person(records: list[AttentionRecord], startup: str
                         ) -> str | None:
    """Head-averaged final-layer argmax over the start-up's sources.

    Returns None when the start-up has at most one distinct source
    (neighbors of a start-up are persons by bipartiteness). Ties break
    toward the smaller node id.
    """
    relevant = [r for r in records if r.target == startup]
    if not relevant:
        return None
    final_layer = max(r.layer for r in relevant)
    totals: dict[str, list] = {}
    for r in relevant:
        if r.layer != final_layer:
            continue
        totals.setdefault(r.source, []).append(r.score)
    if len(totals) <= 1:
        return None
    means = {source: sum(scores) / len(scores)
             for source, scores in totals.items()}
    return min(means, key=lambda s: (-means[s], s))


def export_attention_records(path, records: list[AttentionRecord]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("target\tsource\tlayer\thead\tscore\n")
        for r in records:
            fh.write(f"{r.target}\t{r.source}\t{r.layer}\t{r.head}\t"
                     f"{r.score!r}\n")

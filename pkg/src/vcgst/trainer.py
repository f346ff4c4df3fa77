"""Per-period incremental representation learning.

Each month: copy the previous table forward, randomly initialize brand-new
nodes, run the attention stack over the affected neighborhood, and
fine-tune stack + decoders + affected embedding rows against a joint
link-prediction / node-classification objective. Rows outside the affected
set stay bit-identical to the previous period.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .embeddings import EmbeddingTable
from .errors import InsufficientNonEdges, MissingEmbedding
from .graph import GraphIncrement, NodeKind, TemporalBipartiteGraph
from .gst import GstStack, build_workspace, stack_apply
from .optim import Adam, embedding_init, glorot

EMBED_INIT_LIMIT = 0.1


class DecoderParams:
    """Link-prediction head (square map + bias, shared by both endpoints)
    and a single-logit node-classification head (start-up = 1)."""

    def __init__(self, w_link, b_link, w_cls, b_cls, prefix: str = "dec"):
        self.W_L = ad.Parameter(w_link, f"{prefix}/W_L")
        self.b_LP = ad.Parameter(b_link, f"{prefix}/b_LP")
        self.W_C = ad.Parameter(w_cls, f"{prefix}/W_C")
        self.b_NC = ad.Parameter(b_cls, f"{prefix}/b_NC")

    @classmethod
    def init(cls, rng: np.random.Generator, d: int, prefix: str = "dec"):
        return cls(glorot(rng, d, d), np.zeros((1, d)), glorot(rng, 1, d),
                   np.zeros((1, 1)), prefix)

    @classmethod
    def zeros(cls, d: int, prefix: str = "dec"):
        return cls(np.zeros((d, d)), np.zeros((1, d)), np.zeros((1, d)),
                   np.zeros((1, 1)), prefix)

    def parameters(self) -> list[ad.Parameter]:
        return [self.W_L, self.b_LP, self.W_C, self.b_NC]

    def to_tensors(self) -> dict[str, np.ndarray]:
        return {p.name: p.data for p in self.parameters()}

    def load_tensors(self, tensors) -> None:
        for p in self.parameters():
            p.data[...] = tensors[p.name]


@dataclass
class TrainConfig:
    beta: float = 0.5
    epochs: int = 50
    negative_ratio: int = 1
    seed: int = 0
    n_hops: int = 3                # matches the stack depth
    lr: float = 1e-3
    lp_use_current: bool = False   # score both endpoints from the live table

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")


@dataclass
class LossTraceRow:
    period: int
    epoch: int
    total: float
    link: float
    classify: float


def _child_rng(seed: int, *salt: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *salt]))


def init_period_embeddings(prev: EmbeddingTable, inc: GraphIncrement,
                           seed: int) -> EmbeddingTable:
    """Copy the previous table and add uniform +/-0.1 rows for new nodes."""
    table = prev.copy(period=inc.period)
    new_ids = sorted({n for n, _ in inc.new_nodes} - set(prev.index))
    if new_ids:
        rng = _child_rng(seed, inc.period, 0)
        table.add_rows(new_ids, embedding_init(rng, len(new_ids), prev.d,
                                               EMBED_INIT_LIMIT))
    return table


def sample_negative_links(graph: TemporalBipartiteGraph, period: int,
                          positives, seed: int, ratio: int = 1
                          ) -> list[tuple[str, str]]:
    """Uniform person/start-up pairs absent from the cumulative edge set.

    Sampled without replacement, deterministically under `seed`; positives
    only size the request. Falls back to full enumeration when rejection
    sampling stalls (small or dense graphs).
    """
    needed = len(set(positives)) * ratio
    if needed == 0:
        return []
    persons = sorted(n for n, k in graph.node_kind.items()
                     if k is NodeKind.PERSON and graph.node_period[n] <= period)
    startups = sorted(n for n, k in graph.node_kind.items()
                      if k is NodeKind.STARTUP
                      and graph.node_period[n] <= period)
    total_pairs = len(persons) * len(startups)
    existing = graph.pair_count_asof(period)
    if total_pairs - existing < needed:
        raise InsufficientNonEdges(
            f"period {period}: need {needed} non-edges, "
            f"only {total_pairs - existing} exist")

    rng = _child_rng(seed, period, 1)
    chosen: list[tuple[str, str]] = []
    seen: set[tuple[str, str]] = set()
    attempts = 0
    max_attempts = 50 * needed + 100
    while len(chosen) < needed and attempts < max_attempts:
        attempts += 1
        pair = (persons[rng.integers(len(persons))],
                startups[rng.integers(len(startups))])
        if pair in seen or graph.has_pair_asof(*pair, period):
            continue
        seen.add(pair)
        chosen.append(pair)
    if len(chosen) < needed:
        pool = [(p, s) for p in persons for s in startups
                if (p, s) not in seen and not graph.has_pair_asof(p, s,
                                                                  period)]
        extra = rng.choice(len(pool), size=needed - len(chosen),
                           replace=False)
        chosen.extend(pool[i] for i in sorted(extra))
    return chosen


def lp_scores_batch(u_rows: ad.Tensor, v_rows: ad.Tensor,
                    dec: DecoderParams) -> ad.Tensor:
    """sigma( sigma(W_L u + b) . sigma(W_L v + b) ) per row -> (n, 1)."""
    wl_t = ad.transpose(dec.W_L)
    a = ad.sigmoid(ad.add(ad.matmul(u_rows, wl_t), dec.b_LP))
    b = ad.sigmoid(ad.add(ad.matmul(v_rows, wl_t), dec.b_LP))
    return ad.sigmoid(ad.sum_cols(ad.mul(a, b)))


def nc_scores_batch(rows: ad.Tensor, dec: DecoderParams) -> ad.Tensor:
    """sigma(W_C row + b) per row -> (n, 1); start-up class probability."""
    return ad.sigmoid(ad.add(ad.matmul(rows, ad.transpose(dec.W_C)),
                             dec.b_NC))


def lp_score(r_t, r_prev, u: str, v: str, dec: DecoderParams) -> float:
    """Link probability for one pair; u from the current table, v from the
    previous one (see TrainConfig.lp_use_current for the variant)."""
    u_vec = r_t.get(u) if hasattr(r_t, "get") else r_t[u]
    v_vec = r_prev.get(v) if hasattr(r_prev, "get") else r_prev[v]
    if u_vec is None:
        raise MissingEmbedding(f"no current-period row for {u!r}")
    if v_vec is None:
        raise MissingEmbedding(f"no previous-period row for {v!r}")
    with ad.no_grad():
        out = lp_scores_batch(ad.constant(np.atleast_2d(u_vec)),
                              ad.constant(np.atleast_2d(v_vec)), dec)
    return float(out.data[0, 0])


def nc_score(r_t, v: str, dec: DecoderParams) -> float:
    vec = r_t.get(v) if hasattr(r_t, "get") else r_t[v]
    if vec is None:
        raise MissingEmbedding(f"no row for {v!r}")
    with ad.no_grad():
        out = nc_scores_batch(ad.constant(np.atleast_2d(vec)), dec)
    return float(out.data[0, 0])


class _RowSource:
    """Differentiable row lookup: affected rows come from the live stack
    output, everything else from a constant table."""

    def __init__(self, out_tensor, affected_index, fallback: EmbeddingTable):
        self.out = out_tensor
        self.affected_index = affected_index
        self.fallback = fallback

    def gather(self, ids: list[str]) -> ad.Tensor:
        live_pos = [i for i, n in enumerate(ids)
                    if n in self.affected_index]
        const_pos = [i for i, n in enumerate(ids)
                     if n not in self.affected_index]
        pieces = []
        if live_pos:
            idx = np.array([self.affected_index[ids[i]] for i in live_pos],
                           dtype=np.int64)
            pieces.append(ad.take_rows(self.out, idx))
        if const_pos:
            rows = np.stack([self.fallback.row(ids[i]) for i in const_pos])
            pieces.append(ad.constant(rows))
        cat = pieces[0] if len(pieces) == 1 else ad.concat(pieces[0],
                                                           pieces[1], axis=0)
        perm = np.empty(len(ids), dtype=np.int64)
        for spot, i in enumerate(live_pos + const_pos):
            perm[i] = spot
        return ad.take_rows(cat, perm)


def period_finetune(graph: TemporalBipartiteGraph, period: int,
                    prev_table: EmbeddingTable, stack: GstStack,
                    dec: DecoderParams, cfg: TrainConfig,
                    inc: GraphIncrement | None = None
                    ) -> tuple[EmbeddingTable, list[LossTraceRow]]:
    """Fine-tune one period; returns the period table and its loss trace.

    Only rows of nodes within cfg.n_hops of the increment are trained (or
    even touched); an empty increment returns a copy of the previous
    table with an empty trace.
    """
    if inc is None:
        inc = graph.increment_view(period)
    if inc.is_empty():
        return prev_table.copy(period=period), []

    start = init_period_embeddings(prev_table, inc, cfg.seed)
    affected = sorted(graph.affected_nodes(inc, cfg.n_hops))
    ws = build_workspace(affected,
                         lambda n: graph.neighbors_asof(n, period))
    aff_index = {n: i for i, n in enumerate(affected)}
    e_aff = ad.Parameter(np.stack([start.row(n) for n in affected]),
                         f"embeddings/{period}")
    frozen = ad.constant(
        np.stack([start.row(n) for n in ws.frozen_ids])
        if ws.frozen_ids else np.zeros((0, start.d)))

    positive_pairs = sorted({(e.person, e.startup) for e in inc.new_edges})
    nc_labels = np.array([[1.0 if graph.kind(n) is NodeKind.STARTUP else 0.0]
                          for n in affected])

    params = stack.parameters() + dec.parameters() + [e_aff]
    opt = Adam(params, lr=cfg.lr)
    trace: list[LossTraceRow] = []

    for epoch in range(cfg.epochs):
        negatives = sample_negative_links(graph, period, positive_pairs,
                                          seed=cfg.seed * 1_000_003 + epoch,
                                          ratio=cfg.negative_ratio) \
            if positive_pairs else []
        opt.zero_grad()
        out, _ = stack_apply(stack, e_aff, frozen, ws)
        rows = _RowSource(out, aff_index, start)

        loss_terms = []
        link_val = 0.0
        if positive_pairs:
            pairs = positive_pairs + negatives
            u_rows = rows.gather([p for p, _ in pairs])
            if cfg.lp_use_current:
                v_rows = rows.gather([s for _, s in pairs])
            else:
                v_rows = ad.constant(
                    np.stack([start.row(s) for _, s in pairs]))
            lp_probs = lp_scores_batch(u_rows, v_rows, dec)
            labels = np.zeros((len(pairs), 1))
            labels[:len(positive_pairs)] = 1.0
            l_lp = ad.bce_loss(lp_probs, labels)
            link_val = l_lp.item()
            loss_terms.append(ad.scale(l_lp, cfg.beta))
        nc_probs = nc_scores_batch(out, dec)
        l_nc = ad.bce_loss(nc_probs, nc_labels)
        loss_terms.append(ad.scale(l_nc, 1.0 - cfg.beta))
        loss = loss_terms[0]
        for term in loss_terms[1:]:
            loss = ad.add(loss, term)
        ad.backward(loss)
        opt.step()
        trace.append(LossTraceRow(period, epoch, loss.item(), link_val,
                                  l_nc.item()))

    with ad.no_grad():
        final, _ = stack_apply(stack, e_aff, frozen, ws)
    table = start
    table.set_rows(affected, final.data)
    return table, trace


def base_increment(graph: TemporalBipartiteGraph) -> GraphIncrement:
    """The base snapshot viewed as one big increment (everything new)."""
    base = graph.base_period
    nodes = [(n, graph.node_kind[n]) for n, p in graph.node_period.items()
             if p <= base]
    edges = [e for e in graph.edges if e.period <= base]
    return GraphIncrement(period=base, new_nodes=nodes, new_edges=edges)


def run_all_periods(graph: TemporalBipartiteGraph, stack: GstStack,
                    dec: DecoderParams, cfg: TrainConfig,
                    progress=None
                    ) -> tuple[dict[int, EmbeddingTable],
                               list[LossTraceRow]]:
    """Train the base snapshot plus every increment; tables share d.

    Returns ({period: table} for base..max_period, full loss trace).
    """
    base = graph.base_period
    empty = EmbeddingTable(period=base - 1 if base else -1, d=stack.d)
    tables: dict[int, EmbeddingTable] = {}
    trace: list[LossTraceRow] = []

    inc0 = base_increment(graph)
    table, rows = period_finetune(graph, base, empty, stack, dec, cfg,
                                  inc=inc0)
    tables[base] = table
    trace.extend(rows)
    if progress:
        progress(base, rows)
    for period in range(base + 1, graph.max_period + 1):
        table, rows = period_finetune(graph, period, tables[period - 1],
                                      stack, dec, cfg)
        tables[period] = table
        trace.extend(rows)
        if progress:
            progress(period, rows)
    return tables, trace


def write_loss_trace(path, trace: list[LossTraceRow]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("period\tepoch\tloss\tloss_lp\tloss_nc\n")
        for row in trace:
            fh.write(f"{row.period}\t{row.epoch}\t{row.total!r}\t"
                     f"{row.link!r}\t{row.classify!r}\n")

"""Final supervised classifier: attribute fusion and success probability.

For a candidate start-up first funded at period t, the 1-hop ego network
(the start-up plus its affiliated persons) is featurized as
projection(attributes ++ sequential-representation-or-zero), fused by a
second attention stack, and scored by a three-layer perceptron (tanh,
tanh, sigmoid). Label construction (success = IPO/acquisition within 60
months of first funding) lives here too.
"""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .attributes import (PERSON_DIM, STARTUP_DIM, AttributeScaler,
                         encode_person, encode_startup)
from .errors import (DataError, EmptyTrainingSet, MissingEmbedding,
                     MissingFirstFunding)
from .graph import NodeKind
from .gst import (AttentionRecord, GstStack, Workspace, build_workspace,
                  records_from_probs, stack_apply, top_attention_person)
from .optim import Adam, glorot
from .records import PersonRecord, StartUpRecord
from .sequence import SequenceParams, build_sequence, encode_batch
from .timeutil import months_between

SUCCESS_WINDOW_MONTHS = 60

SUCCESS = 1
FAILURE = 0
CENSORED = -1


@dataclass(frozen=True)
class SuccessLabel:
    startup: str
    label: int  # SUCCESS, FAILURE, or CENSORED

    @property
    def resolved(self) -> bool:
        return self.label != CENSORED


def make_label(record: StartUpRecord, data_horizon: _dt.date,
               window_months: int = SUCCESS_WINDOW_MONTHS) -> SuccessLabel:
    """Outcome-window rule relative to first funding (default 60 months).

    A qualifying outcome inside the window yields success even when the
    horizon cuts the window short; failure requires the full window to be
    observable; anything else is censored. Synthetic worlds with a
    compressed calendar may shorten the window via `window_months`.
    """
    if record.first_funding_date is None:
        raise MissingFirstFunding(f"{record.node}: no funding rounds")
    first = record.first_funding_date
    if record.outcome_type in ("ipo", "acquired") \
            and record.outcome_date is not None \
            and record.outcome_date <= data_horizon \
            and months_between(record.outcome_date, first) <= window_months:
        return SuccessLabel(record.node, SUCCESS)
    if months_between(data_horizon, first) >= window_months:
        return SuccessLabel(record.node, FAILURE)
    return SuccessLabel(record.node, CENSORED)


@dataclass(frozen=True)
class PredictionRecord:
    startup: str
    period: int
    probability: float
    rank: int
    top_attention_person: str | None


class MlpParams:
    """Three dense layers: tanh, tanh, sigmoid; output width 1."""

    def __init__(self, weights, biases, prefix: str = "mlp"):
        self.W = [ad.Parameter(w, f"{prefix}/W{i + 1}")
                  for i, w in enumerate(weights)]
        self.b = [ad.Parameter(b, f"{prefix}/b{i + 1}")
                  for i, b in enumerate(biases)]

    @classmethod
    def init(cls, rng, d_in: int, hidden: tuple[int, int] = (64, 32),
             prefix: str = "mlp"):
        h1, h2 = hidden
        weights = [glorot(rng, h1, d_in), glorot(rng, h2, h1),
                   glorot(rng, 1, h2)]
        biases = [np.zeros((1, h1)), np.zeros((1, h2)), np.zeros((1, 1))]
        return cls(weights, biases, prefix)

    @classmethod
    def zeros(cls, d_in: int, hidden: tuple[int, int] = (64, 32),
              prefix: str = "mlp"):
        h1, h2 = hidden
        return cls([np.zeros((h1, d_in)), np.zeros((h2, h1)),
                    np.zeros((1, h2))],
                   [np.zeros((1, h1)), np.zeros((1, h2)),
                    np.zeros((1, 1))], prefix)

    def parameters(self) -> list[ad.Parameter]:
        return self.W + self.b


def predict_batch(mlp: MlpParams, z: ad.Tensor) -> ad.Tensor:
    h1 = ad.tanh(ad.add(ad.matmul(z, ad.transpose(mlp.W[0])), mlp.b[0]))
    h2 = ad.tanh(ad.add(ad.matmul(h1, ad.transpose(mlp.W[1])), mlp.b[1]))
    return ad.sigmoid(ad.add(ad.matmul(h2, ad.transpose(mlp.W[2])),
                             mlp.b[2]))


def predict(mlp: MlpParams, z: np.ndarray) -> float:
    """Success probability for one fused vector."""
    with ad.no_grad():
        out = predict_batch(mlp, ad.constant(np.atleast_2d(z)))
    return float(out.data[0, 0])


class PredictorModel:
    """Everything trained at the prediction stage: per-kind feature
    projections, the sequence cell, the fusion stack, and the MLP."""

    def __init__(self, d: int, d_seq: int, heads: int, layers: int,
                 hidden: tuple[int, int], rng: np.random.Generator):
        self.d = d
        self.d_seq = d_seq
        self.hidden = tuple(hidden)
        self.proj_startup = ad.Parameter(
            glorot(rng, d, STARTUP_DIM + d_seq), "fuse/proj_startup")
        self.proj_person = ad.Parameter(
            glorot(rng, d, PERSON_DIM + d_seq), "fuse/proj_person")
        self.seq = SequenceParams.init(rng, d, d_seq, prefix="seq")
        self.gst2 = GstStack.init(rng, layers, d, heads, prefix="gst2")
        self.mlp = MlpParams.init(rng, d, hidden)

    def parameters(self, freeze_sequence: bool = False):
        params = [self.proj_startup, self.proj_person]
        if not freeze_sequence:
            params += self.seq.parameters()
        return params + self.gst2.parameters() + self.mlp.parameters()

    def to_tensors(self) -> dict[str, np.ndarray]:
        return {p.name: p.data for p in self.parameters()}

    def load_tensors(self, tensors) -> None:
        for p in self.parameters():
            p.data[...] = tensors[p.name]


@dataclass
class ClassifierConfig:
    lr: float = 1e-3
    epochs: int = 200
    patience: int = 20
    lookback: int = 12
    seed: int = 0
    freeze_sequence: bool = False
    rank_k: int = 50  # early stopping watches validation P@K at this K


# -- batched ego-network assembly ---------------------------------------------------


@dataclass
class _Batch:
    """Constant pieces of a fused forward pass over many candidates."""

    samples: list[tuple[str, int]]          # (startup, period)
    ws: Workspace
    center_rows: np.ndarray                 # (B,)
    person_keys: list[str]
    center_attr: np.ndarray                 # (B, STARTUP_DIM)
    person_attr: np.ndarray                 # (P, PERSON_DIM)
    steps: list[np.ndarray]                 # lookback+1 x (B, d)
    step_masks: list[np.ndarray]            # lookback+1 x (B,)
    perm: np.ndarray                        # workspace row -> feature row
    labels: np.ndarray | None = None        # (B, 1)


def _sample_key(i: int, node: str) -> str:
    return f"{i}::{node}"


def build_batch(samples: list[tuple[str, int]], graph, tables,
                startup_records: dict[str, StartUpRecord],
                person_records: dict[str, PersonRecord],
                scaler: AttributeScaler, lookback: int, d: int,
                labels: list[int] | None = None) -> _Batch:
    """Precompute attributes, sequences and the ego-net union workspace.

    Each candidate owns private workspace rows (a person affiliated with
    two candidates appears twice); ego nets are stars, so neighbor lists
    come straight from the as-of graph view.
    """
    target_ids: list[str] = []
    neighbor_map: dict[str, list[str]] = {}
    center_rows: list[int] = []
    person_keys: list[str] = []
    center_attr: list[np.ndarray] = []
    person_attr: list[np.ndarray] = []
    for i, (startup, period) in enumerate(samples):
        if startup not in startup_records:
            raise MissingEmbedding(f"unknown start-up {startup!r}")
        center = _sample_key(i, startup)
        persons = [p for p in graph.neighbors_asof(startup, period)
                   if graph.kind(p) is NodeKind.PERSON] \
            if graph.has_node(startup, period) else []
        center_rows.append(len(target_ids))
        target_ids.append(center)
        neighbor_map[center] = [_sample_key(i, p) for p in persons]
        center_attr.append(encode_startup(startup_records[startup],
                                          scaler).values)
        for p in persons:
            key = _sample_key(i, p)
            target_ids.append(key)
            neighbor_map[key] = [center]
            person_keys.append(key)
            person_attr.append(encode_person(person_records[p]).values)
    ws = build_workspace(target_ids, lambda n: neighbor_map.get(n, ()))

    steps: list[np.ndarray] = []
    step_masks: list[np.ndarray] = []
    n = len(samples)
    seqs = [build_sequence(tables, s, t, lookback) for s, t in samples]
    for step in range(lookback + 1):
        x = np.zeros((n, d))
        m = np.zeros(n)
        for i, seq in enumerate(seqs):
            if seq.mask[step]:
                x[i] = seq.vectors[step]
                m[i] = 1.0
        steps.append(x)
        step_masks.append(m)

    # feature rows are ordered centers-then-persons; perm maps workspace
    # row index -> row in that concatenation
    perm = np.empty(len(target_ids), dtype=np.int64)
    center_set = set()
    for b, row in enumerate(center_rows):
        perm[row] = b
        center_set.add(row)
    next_person = 0
    for row in range(len(target_ids)):
        if row in center_set:
            continue
        perm[row] = n + next_person
        next_person += 1

    return _Batch(samples=list(samples), ws=ws,
                  center_rows=np.asarray(center_rows, dtype=np.int64),
                  person_keys=person_keys,
                  center_attr=np.stack(center_attr)
                  if center_attr else np.zeros((0, STARTUP_DIM)),
                  person_attr=np.stack(person_attr)
                  if person_attr else np.zeros((0, PERSON_DIM)),
                  steps=steps, step_masks=step_masks, perm=perm,
                  labels=np.asarray(labels, dtype=float).reshape(-1, 1)
                  if labels is not None else None)


def fused_forward(model: PredictorModel, batch: _Batch,
                  collect_attention: bool = False):
    """Differentiable fuse + ego attention pass; returns (z, probs layers)."""
    seq_h = encode_batch(model.seq,
                         [ad.constant(x) for x in batch.steps],
                         batch.step_masks)
    center_in = ad.concat(ad.constant(batch.center_attr), seq_h, axis=1)
    center_feat = ad.matmul(center_in, ad.transpose(model.proj_startup))
    pieces = center_feat
    if len(batch.person_attr):
        person_in = ad.constant(np.concatenate(
            [batch.person_attr,
             np.zeros((len(batch.person_attr), model.d_seq))], axis=1))
        person_feat = ad.matmul(person_in, ad.transpose(model.proj_person))
        pieces = ad.concat(center_feat, person_feat, axis=0)
    feats = ad.take_rows(pieces, batch.perm)
    empty = ad.constant(np.zeros((0, model.d)))
    out, probs = stack_apply(model.gst2, feats, empty, batch.ws,
                             collect_attention=collect_attention)
    z = ad.take_rows(out, batch.center_rows)
    return z, probs


def fuse(gst2: GstStack, graph, period: int, startup: str,
         attr_vectors: dict[str, np.ndarray],
         seq_reprs: dict[str, np.ndarray],
         proj_startup: np.ndarray, proj_person: np.ndarray,
         record_attention: bool = False):
    """Single-start-up fusion (functional form; powers tests and tools).

    attr_vectors maps every ego-net node to its raw attribute vector;
    seq_reprs supplies sequential representations (nodes absent from the
    map, i.e. persons, contribute zeros).
    """
    d = gst2.d
    d_seq = proj_startup.shape[1] - STARTUP_DIM
    persons = [p for p in graph.neighbors_asof(startup, period)
               if graph.kind(p) is NodeKind.PERSON]
    feats = {}
    seq = seq_reprs.get(startup, np.zeros(d_seq))
    feats[startup] = proj_startup @ np.concatenate(
        [attr_vectors[startup], seq])
    for p in persons:
        feats[p] = proj_person @ np.concatenate(
            [attr_vectors[p], seq_reprs.get(p, np.zeros(d_seq))])
    neighbor_map = {startup: persons}
    for p in persons:
        neighbor_map[p] = [startup]
    ws = build_workspace([startup] + persons,
                         lambda n: neighbor_map.get(n, ()))
    h = np.stack([feats[n] for n in ws.target_ids])
    with ad.no_grad():
        out, probs = stack_apply(gst2, ad.constant(h),
                                 ad.constant(np.zeros((0, d))), ws,
                                 collect_attention=record_attention)
    records = records_from_probs(ws, probs) if record_attention else []
    return out.data[0].copy(), records


# -- training and prediction ------------------------------------------------------------


@dataclass
class TrainHistory:
    epoch_losses: list[float] = field(default_factory=list)
    val_scores: list[tuple[int, float]] = field(default_factory=list)
    best_epoch: int = -1
    best_val: float = float("nan")


def train_classifier(model: PredictorModel, graph, tables, startup_records,
                     person_records, scaler, train_set, cfg: ClassifierConfig,
                     val_set=None, progress=None) -> TrainHistory:
    """Minimize BCE over the training cohort; early-stop on validation
    ranking precision when a validation set is provided."""
    if not train_set:
        raise EmptyTrainingSet("no resolved training samples")
    for _, _, label in train_set:
        if label not in (SUCCESS, FAILURE):
            raise DataError("censored sample in training set")

    batch = build_batch([(s, p) for s, p, _ in train_set], graph, tables,
                        startup_records, person_records, scaler,
                        cfg.lookback, model.d,
                        labels=[lab for _, _, lab in train_set])
    val_batches = None
    if val_set:
        by_period: dict[int, list] = {}
        for s, p, lab in val_set:
            by_period.setdefault(p, []).append((s, p, lab))
        val_batches = []
        for p in sorted(by_period):
            rows = sorted(by_period[p])
            vb = build_batch([(s, per) for s, per, _ in rows], graph,
                             tables, startup_records, person_records,
                             scaler, cfg.lookback, model.d)
            val_batches.append((vb, [lab for _, _, lab in rows]))

    params = model.parameters(freeze_sequence=cfg.freeze_sequence)
    opt = Adam(params, lr=cfg.lr)
    history = TrainHistory()
    best_snapshot = None
    stale = 0
    for epoch in range(cfg.epochs):
        opt.zero_grad()
        z, _ = fused_forward(model, batch)
        probs = predict_batch(model.mlp, z)
        loss = ad.bce_loss(probs, batch.labels)
        ad.backward(loss)
        opt.step()
        history.epoch_losses.append(loss.item())
        if progress:
            progress(epoch, loss.item())
        if val_batches:
            score, val_loss = _validation_scores(model, val_batches,
                                                 cfg.rank_k)
            history.val_scores.append((epoch, score))
            key = (score, -val_loss)
            if history.best_epoch < 0 or key > best_key:
                history.best_epoch = epoch
                history.best_val = score
                best_key = key
                best_snapshot = {p.name: p.data.copy()
                                 for p in model.parameters()}
                stale = 0
            else:
                stale += 1
                if stale >= cfg.patience:
                    break
    if best_snapshot is not None:
        model.load_tensors(best_snapshot)
    return history


def _validation_scores(model, val_batches, k: int) -> tuple[float, float]:
    """(mean monthly P@k, mean BCE) over the validation cohorts.

    Monthly precision is the early-stopping headline; it is coarse
    (steps of 1/k) and the positives-only part-b months contribute a
    constant, so the smooth BCE term breaks plateau ties."""
    months = []
    losses = []
    for vb, labels in val_batches:
        with ad.no_grad():
            z, _ = fused_forward(model, vb)
            probs = predict_batch(model.mlp, z).data[:, 0]
            bce = ad.bce_loss(
                ad.constant(probs[:, None]),
                np.asarray(labels, dtype=float).reshape(-1, 1))
        losses.append(float(bce.data) * len(labels))
        order = sorted(range(len(labels)),
                       key=lambda i: (-probs[i], vb.samples[i][0]))
        top = order[:min(k, len(order))]
        months.append(sum(labels[i] == SUCCESS for i in top) / len(top))
    if not months:
        return float("nan"), float("nan")
    total = sum(len(labels) for _, labels in val_batches)
    return float(np.mean(months)), sum(losses) / total


def predict_cohort(model: PredictorModel, graph, tables, startup_records,
                   person_records, scaler, period: int, candidates,
                   lookback: int, return_attention: bool = False):
    """Rank a month's first-funded candidates by success probability.

    Deterministic: ties break by node id ascending; attention of the
    final fusion layer supplies the top-attention person per candidate.
    With return_attention, also returns the fusion attention records
    (node ids unmangled) for export.
    """
    candidates = sorted(candidates)
    if not candidates:
        return ([], []) if return_attention else []
    batch = build_batch([(s, period) for s in candidates], graph, tables,
                        startup_records, person_records, scaler, lookback,
                        model.d)
    with ad.no_grad():
        z, probs_layers = fused_forward(model, batch,
                                        collect_attention=True)
        probs = predict_batch(model.mlp, z).data[:, 0]
    records = records_from_probs(batch.ws, probs_layers)
    order = sorted(range(len(candidates)),
                   key=lambda i: (-probs[i], candidates[i]))
    out = []
    for rank, i in enumerate(order, start=1):
        center_key = _sample_key(i, candidates[i])
        top = top_attention_person(records, center_key)
        if top is not None:
            top = top.split("::", 1)[1]
        out.append(PredictionRecord(startup=candidates[i], period=period,
                                    probability=float(probs[i]), rank=rank,
                                    top_attention_person=top))
    if return_attention:
        plain = [AttentionRecord(target=r.target.split("::", 1)[1],
                                 source=r.source.split("::", 1)[1],
                                 layer=r.layer, head=r.head, score=r.score)
                 for r in records]
        return out, plain
    return out

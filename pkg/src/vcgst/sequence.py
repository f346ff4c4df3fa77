"""Recurrent encoding of a start-up's embedding trajectory.

A standard gated recurrent cell (input/forget/output gates plus candidate)
consumes the last k+1 per-period embeddings, oldest first. Steps from
before the start-up existed are zero-padded and masked; masked steps carry
hidden state through unchanged, so their content cannot influence the
output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .embeddings import EmbeddingTable
from .errors import DimensionMismatch, UnknownStartup
from .optim import glorot

GATES = ("input", "forget", "output", "cell")


class SequenceParams:
    """Gate weights for input width d_in and hidden width d_hidden."""

    def __init__(self, d_in: int, d_hidden: int, tensors=None,
                 prefix: str = "seq"):
        self.d_in = d_in
        self.d_hidden = d_hidden
        self.w = {}
        self.u = {}
        self.b = {}
        for gate in GATES:
            w, u, b = (tensors[gate] if tensors else
                       (np.zeros((d_hidden, d_in)),
                        np.zeros((d_hidden, d_hidden)),
                        np.zeros((1, d_hidden))))
            self.w[gate] = ad.Parameter(w, f"{prefix}/W_{gate}")
            self.u[gate] = ad.Parameter(u, f"{prefix}/U_{gate}")
            self.b[gate] = ad.Parameter(b, f"{prefix}/b_{gate}")

    @classmethod
    def init(cls, rng: np.random.Generator, d_in: int, d_hidden: int,
             prefix: str = "seq"):
        tensors = {gate: (glorot(rng, d_hidden, d_in),
                          glorot(rng, d_hidden, d_hidden),
                          np.zeros((1, d_hidden)))
                   for gate in GATES}
        return cls(d_in, d_hidden, tensors, prefix)

    def parameters(self) -> list[ad.Parameter]:
        return [t for gate in GATES
                for t in (self.w[gate], self.u[gate], self.b[gate])]

    def to_tensors(self) -> dict[str, np.ndarray]:
        return {p.name: p.data for p in self.parameters()}

    def load_tensors(self, tensors) -> None:
        for p in self.parameters():
            p.data[...] = tensors[p.name]


@dataclass
class EmbeddingSequence:
    """k+1 ordered step vectors for one start-up, oldest first."""

    startup: str
    vectors: list[np.ndarray]
    mask: list[bool]          # True = real step, False = padded

    def __len__(self) -> int:
        return len(self.vectors)


def build_sequence(tables: dict[int, EmbeddingTable], startup: str, t: int,
                   k: int) -> EmbeddingSequence:
    """Steps for periods t-k .. t; periods where the start-up (or the
    table itself) does not exist yet are zero-padded and masked."""
    if t not in tables or startup not in tables[t]:
        raise UnknownStartup(f"{startup!r} has no row at period {t}")
    d = tables[t].d
    vectors: list[np.ndarray] = []
    mask: list[bool] = []
    for period in range(t - k, t + 1):
        table = tables.get(period)
        if table is not None and startup in table:
            vectors.append(np.asarray(table.row(startup), dtype=float).copy())
            mask.append(True)
        else:
            vectors.append(np.zeros(d))
            mask.append(False)
    return EmbeddingSequence(startup=startup, vectors=vectors, mask=mask)


def _gate(params: SequenceParams, gate: str, x: ad.Tensor,
          h: ad.Tensor) -> ad.Tensor:
    pre = ad.add(ad.add(ad.matmul(x, ad.transpose(params.w[gate])),
                        ad.matmul(h, ad.transpose(params.u[gate]))),
                 params.b[gate])
    return ad.tanh(pre) if gate == "cell" else ad.sigmoid(pre)


def encode_batch(params: SequenceParams, steps: list[ad.Tensor],
                 masks: list[np.ndarray]) -> ad.Tensor:
    """Run the cell over (B, d_in) step tensors; masks are (B,) flags.

    Masked rows keep their previous hidden/cell state bit-for-bit: the new
    state is blended as mask * new + (1 - mask) * old with a 0/1 mask, so
    padded step content is multiplied away exactly.
    """
    if not steps:
        raise DimensionMismatch("empty sequence")
    n = steps[0].shape[0]
    dh = params.d_hidden
    h = ad.constant(np.zeros((n, dh)))
    c = ad.constant(np.zeros((n, dh)))
    for x, m in zip(steps, masks):
        if x.shape != (n, params.d_in):
            raise DimensionMismatch(f"step shape {x.shape}")
        if not m.any():
            continue
        keep = np.broadcast_to((1.0 - m)[:, None], (n, dh)).copy()
        take = np.broadcast_to(m[:, None], (n, dh)).copy()
        i = _gate(params, "input", x, h)
        f = _gate(params, "forget", x, h)
        o = _gate(params, "output", x, h)
        g = _gate(params, "cell", x, h)
        c_new = ad.add(ad.mul(f, c), ad.mul(i, g))
        h_new = ad.mul(o, ad.tanh(c_new))
        c = ad.add(ad.mul(ad.constant(take), c_new),
                   ad.mul(ad.constant(keep), c))
        h = ad.add(ad.mul(ad.constant(take), h_new),
                   ad.mul(ad.constant(keep), h))
    return h


def encode(params: SequenceParams, seq: EmbeddingSequence) -> np.ndarray:
    """Final hidden state for one sequence (pure, no tape)."""
    steps = [ad.constant(v[None, :]) for v in seq.vectors]
    masks = [np.array([1.0 if m else 0.0]) for m in seq.mask]
    with ad.no_grad():
        h = encode_batch(params, steps, masks)
    return h.data[0].copy()

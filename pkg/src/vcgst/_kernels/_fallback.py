"""Pure-numpy implementations of the ragged attention kernels.

Semantics reference for the compiled core in ``_core.pyx``: both backends
must agree on every function here (up to float summation order).

Edge layout convention: edges are grouped by target. ``ptr`` has length
T + 1 and the edges of target ``t`` occupy ``src[ptr[t]:ptr[t+1]]``.
Empty segments (isolated targets) are legal and yield zero aggregates.
"""

from __future__ import annotations

import numpy as np

NAME = "fallback"


def _nonempty_reduceat(ufunc, x, ptr, fill):
    """Apply ``ufunc.reduceat`` per segment, zero/fill for empty segments."""
    n_seg = len(ptr) - 1
    out = np.full((n_seg,) + x.shape[1:], fill, dtype=x.dtype)
    starts = ptr[:-1]
    nonempty = ptr[1:] > starts
    if nonempty.any():
        out[nonempty] = ufunc.reduceat(x, starts[nonempty], axis=0)
    return out


def segment_sum(x: np.ndarray, ptr: np.ndarray) -> np.ndarray:
    """Sum rows of ``x`` per segment -> (T, m)."""
    return _nonempty_reduceat(np.add, x, ptr, 0.0)


def segment_repeat(y: np.ndarray, ptr: np.ndarray) -> np.ndarray:
    """Broadcast one row of ``y`` per segment back to edge rows -> (E, m)."""
    return np.repeat(y, np.diff(ptr), axis=0)


def segment_softmax(logits: np.ndarray, ptr: np.ndarray) -> np.ndarray:
    """Columnwise softmax within each segment (max-subtracted)."""
    seg_max = _nonempty_reduceat(np.maximum, logits, ptr, 0.0)
    shifted = logits - segment_repeat(seg_max, ptr)
    ex = np.exp(shifted)
    denom = segment_repeat(segment_sum(ex, ptr), ptr)
    return ex / denom


def segment_softmax_grad(probs: np.ndarray, grad: np.ndarray,
                         ptr: np.ndarray) -> np.ndarray:
    """Backward of segment_softmax: p * (g - sum_seg(p * g))."""
    inner = segment_sum(probs * grad, ptr)
    return probs * (grad - segment_repeat(inner, ptr))


def scatter_add_rows(out: np.ndarray, idx: np.ndarray, x: np.ndarray) -> None:
    """Accumulate ``x`` rows into ``out`` at row indices ``idx`` (in place)."""
    np.add.at(out, idx, x)


def edge_attention_forward(K, Q, V, src, ptr, heads, inv_scale):
    """Multi-head attention aggregation over ragged neighbor segments.

    K, V: (N, d) projected rows for every workspace node; Q: (T, d) for the
    targets (target t's query is row t). Head i occupies the column slice
    [i*dh, (i+1)*dh) with dh = d // heads.

    Returns (agg, probs): agg[t] concatenates, per head, the probability-
    weighted sum of neighbor value slices; probs (E, heads) are the
    attention weights (each segment column sums to 1).
    """
    d = K.shape[1]
    dh = d // heads
    k_src = K[src]
    q_rep = segment_repeat(Q, ptr)
    prod = (k_src * q_rep).reshape(len(src), heads, dh)
    logits = prod.sum(axis=2) * inv_scale
    probs = segment_softmax(logits, ptr)
    weighted = V[src].reshape(len(src), heads, dh) * probs[:, :, None]
    agg = segment_sum(weighted.reshape(len(src), d), ptr)
    return agg, probs


def edge_attention_backward(K, Q, V, src, ptr, heads, inv_scale, probs,
                            grad_agg):
    """Gradients of edge_attention_forward w.r.t. K, Q, V."""
    E = len(src)
    d = K.shape[1]
    dh = d // heads
    g_rep = segment_repeat(grad_agg, ptr).reshape(E, heads, dh)
    v_src = V[src].reshape(E, heads, dh)

    dV = np.zeros_like(V)
    scatter_add_rows(dV, src, (g_rep * probs[:, :, None]).reshape(E, d))

    dp = (v_src * g_rep).sum(axis=2)
    dlogit = segment_softmax_grad(probs, dp, ptr) * inv_scale

    q_rep = segment_repeat(Q, ptr).reshape(E, heads, dh)
    dK = np.zeros_like(K)
    scatter_add_rows(dK, src, (dlogit[:, :, None] * q_rep).reshape(E, d))

    k_src = K[src].reshape(E, heads, dh)
    dQ = segment_sum((dlogit[:, :, None] * k_src).reshape(E, d), ptr)
    return dK, dQ, dV

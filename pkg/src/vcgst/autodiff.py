"""Dense float64 tensors with tape-based reverse-mode differentiation.

Every trainable part of the pipeline (attention layers, decoders, the
recurrent cell, the classifier) is built from the ops here. Ops are pure:
inputs are never mutated, outputs are freshly allocated, and any NaN/Inf in
an op result raises NonFiniteValue. Arrays ride on numpy; the ragged
segment/attention primitives dispatch to the kernel backend.
"""

from __future__ import annotations

from contextlib import contextmanager

import numpy as np

from . import _kernels
from .errors import NonFiniteGradient, NonFiniteValue, ShapeMismatch

_GRAD_ENABLED = True


@contextmanager
def no_grad():
    """Disable tape recording inside the block (inference paths)."""
    global _GRAD_ENABLED
    prev = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


def _as_array(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    return arr


def _check_finite(arr: np.ndarray, opname: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue(f"{opname} produced non-finite values")


class Tensor:
    """A tape node: immutable value plus optional backward closure."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_vjp")

    def __init__(self, data, requires_grad=False, parents=(), vjp=None):
        self.data = _as_array(data)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = parents
        self._vjp = vjp

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    def item(self) -> float:
        return float(self.data)


class Parameter(Tensor):
    """Trainable leaf tensor; gradient buffer always allocated."""

    __slots__ = ("name",)

    def __init__(self, data, name: str):
        super().__init__(data, requires_grad=True)
        self.name = name
        self.grad = np.zeros_like(self.data)

    def zero_grad(self) -> None:
        self.grad[...] = 0.0

    def __repr__(self):
        return f"Parameter({self.name!r}, shape={self.data.shape})"


def constant(data) -> Tensor:
    return Tensor(data)


def _node(data, parents, vjp, opname) -> Tensor:
    _check_finite(data, opname)
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        return Tensor(data, requires_grad=True, parents=tuple(parents), vjp=vjp)
    return Tensor(data)


# -- elementwise and linear ops ----------------------------------------------

def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"matmul {a.shape} @ {b.shape}")
    out = a.data @ b.data

    def vjp(g):
        return g @ b.data.T, a.data.T @ g

    return _node(out, (a, b), vjp, "matmul")


def transpose(a: Tensor) -> Tensor:
    if a.data.ndim != 2:
        raise ShapeMismatch(f"transpose of ndim {a.data.ndim}")
    return _node(a.data.T.copy(), (a,), lambda g: (g.T.copy(),), "transpose")


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum; also accepts a (1, n) bias row for a (m, n) left arg."""
    if a.shape == b.shape:
        def vjp(g):
            return g, g
    elif (a.data.ndim == 2 and b.data.ndim == 2
          and b.shape == (1, a.shape[1])):
        def vjp(g):
            return g, g.sum(axis=0, keepdims=True)
    else:
        raise ShapeMismatch(f"add {a.shape} + {b.shape}")
    return _node(a.data + b.data, (a, b), vjp, "add")


def sub(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeMismatch(f"sub {a.shape} - {b.shape}")
    return _node(a.data - b.data, (a, b), lambda g: (g, -g), "sub")


def mul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeMismatch(f"mul {a.shape} * {b.shape}")
    return _node(a.data * b.data, (a, b),
                 lambda g: (g * b.data, g * a.data), "mul")


def scale(a: Tensor, c: float) -> Tensor:
    c = float(c)
    return _node(a.data * c, (a,), lambda g: (g * c,), "scale")


def concat(a: Tensor, b: Tensor, axis: int = 1) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ShapeMismatch("concat expects 2-D operands")
    other = 1 - axis
    if a.shape[other] != b.shape[other]:
        raise ShapeMismatch(f"concat {a.shape} | {b.shape} on axis {axis}")
    out = np.concatenate([a.data, b.data], axis=axis)
    split = a.shape[axis]

    def vjp(g):
        if axis == 0:
            return g[:split], g[split:]
        return g[:, :split], g[:, split:]

    return _node(out, (a, b), vjp, "concat")


def sigmoid(a: Tensor) -> Tensor:
    # two-branch form avoids overflow in exp for large |x|
    x = a.data
    out = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))),
                   np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))

    def vjp(g):
        return (g * out * (1.0 - out),)

    return _node(out, (a,), vjp, "sigmoid")


def tanh(a: Tensor) -> Tensor:
    out = np.tanh(a.data)
    return _node(out, (a,), lambda g: (g * (1.0 - out * out),), "tanh")


def log(a: Tensor) -> Tensor:
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(a.data)
    return _node(out, (a,), lambda g: (g / a.data,), "log")


def rowwise_softmax(a: Tensor) -> Tensor:
    """Stable softmax along axis 1; each output row sums to 1."""
    if a.data.ndim != 2:
        raise ShapeMismatch("rowwise_softmax expects a 2-D tensor")
    shifted = a.data - a.data.max(axis=1, keepdims=True)
    ex = np.exp(shifted)
    out = ex / ex.sum(axis=1, keepdims=True)

    def vjp(g):
        inner = (out * g).sum(axis=1, keepdims=True)
        return (out * (g - inner),)

    return _node(out, (a,), vjp, "rowwise_softmax")


# -- reductions ---------------------------------------------------------------

def sum_rows(a: Tensor) -> Tensor:
    """Collapse rows: (n, m) -> (1, m)."""
    out = a.data.sum(axis=0, keepdims=True)

    def vjp(g):
        return (np.broadcast_to(g, a.shape).copy(),)

    return _node(out, (a,), vjp, "sum_rows")


def sum_cols(a: Tensor) -> Tensor:
    """Collapse columns: (n, m) -> (n, 1)."""
    out = a.data.sum(axis=1, keepdims=True)

    def vjp(g):
        return (np.broadcast_to(g, a.shape).copy(),)

    return _node(out, (a,), vjp, "sum_cols")


def sum_all(a: Tensor) -> Tensor:
    out = np.asarray(a.data.sum())

    def vjp(g):
        return (np.full(a.shape, float(g)),)

    return _node(out, (a,), vjp, "sum_all")


# -- structured / ragged ops ---------------------------------------------------

def take_rows(a: Tensor, idx: np.ndarray) -> Tensor:
    idx = np.asarray(idx, dtype=np.int64)
    out = a.data[idx]

    def vjp(g):
        acc = np.zeros_like(a.data)
        _kernels.scatter_add_rows(acc, idx, np.ascontiguousarray(g))
        return (acc,)

    return _node(out, (a,), vjp, "take_rows")


def slice_rows(a: Tensor, start: int, stop: int) -> Tensor:
    out = a.data[start:stop].copy()

    def vjp(g):
        acc = np.zeros_like(a.data)
        acc[start:stop] = g
        return (acc,)

    return _node(out, (a,), vjp, "slice_rows")


def segment_sum(a: Tensor, ptr: np.ndarray) -> Tensor:
    ptr = np.asarray(ptr, dtype=np.int64)
    out = _kernels.segment_sum(np.ascontiguousarray(a.data), ptr)

    def vjp(g):
        return (_kernels.segment_repeat(np.ascontiguousarray(g), ptr),)

    return _node(out, (a,), vjp, "segment_sum")


def segment_softmax(a: Tensor, ptr: np.ndarray) -> Tensor:
    """Columnwise softmax within edge segments; segment columns sum to 1."""
    ptr = np.asarray(ptr, dtype=np.int64)
    out = _kernels.segment_softmax(np.ascontiguousarray(a.data), ptr)

    def vjp(g):
        return (_kernels.segment_softmax_grad(out, np.ascontiguousarray(g),
                                              ptr),)

    return _node(out, (a,), vjp, "segment_softmax")


def edge_attention(K: Tensor, Q: Tensor, V: Tensor, src: np.ndarray,
                   ptr: np.ndarray, heads: int, inv_scale: float):
    """Fused multi-head neighbor attention (the compiled hot kernel).

    Returns (aggregate Tensor (T, d), attention probabilities ndarray
    (E, heads)); the probabilities are a detached by-product for
    interpretability, not part of the tape.
    """
    src = np.asarray(src, dtype=np.int64)
    ptr = np.asarray(ptr, dtype=np.int64)
    kd = np.ascontiguousarray(K.data)
    qd = np.ascontiguousarray(Q.data)
    vd = np.ascontiguousarray(V.data)
    agg, probs = _kernels.edge_attention_forward(kd, qd, vd, src, ptr,
                                                 heads, inv_scale)

    def vjp(g):
        return _kernels.edge_attention_backward(
            kd, qd, vd, src, ptr, heads, inv_scale, probs,
            np.ascontiguousarray(g))

    return _node(agg, (K, Q, V), vjp, "edge_attention"), probs


# -- losses ---------------------------------------------------------------------

BCE_EPS = 1e-7


def bce_loss(pred: Tensor, targets) -> Tensor:
    """Mean binary cross entropy; probabilities clamped to [eps, 1-eps]."""
    y = _as_array(targets.data if isinstance(targets, Tensor) else targets)
    if pred.shape != y.shape:
        raise ShapeMismatch(f"bce_loss {pred.shape} vs {y.shape}")
    n = max(pred.data.size, 1)
    p = np.clip(pred.data, BCE_EPS, 1.0 - BCE_EPS)
    out = np.asarray(-(y * np.log(p) + (1.0 - y) * np.log1p(-p)).sum() / n)

    def vjp(g):
        inside = (pred.data > BCE_EPS) & (pred.data < 1.0 - BCE_EPS)
        grad = np.where(inside, (p - y) / (p * (1.0 - p)), 0.0)
        return (grad * (float(g) / n),)

    return _node(out, (pred,), vjp, "bce_loss")


# -- reverse pass -----------------------------------------------------------------

def backward(loss: Tensor) -> None:
    """Populate gradients of all Parameters reachable from `loss`.

    The recorded graph is a DAG by construction (ops only consume already
    existing tensors), so a plain iterative topological order suffices.
    """
    if loss.data.shape != ():
        raise ShapeMismatch("backward expects a scalar loss")
    _check_finite(loss.data, "loss")
    if not loss.requires_grad:
        return

    topo: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            topo.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))

    grads: dict[int, np.ndarray] = {id(loss): np.asarray(1.0)}
    for node in reversed(topo):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if isinstance(node, Parameter):
            node.grad += g
            if not np.all(np.isfinite(node.grad)):
                raise NonFiniteGradient(f"gradient of {node.name} not finite")
            continue
        if node._vjp is None:
            continue
        parent_grads = node._vjp(g)
        for p, pg in zip(node._parents, parent_grads):
            if not p.requires_grad or pg is None:
                continue
            if id(p) in grads:
                grads[id(p)] = grads[id(p)] + pg
            else:
                grads[id(p)] = pg

"""Kernel backend selection: compiled core if built, numpy fallback otherwise.

The compiled extension (``_core``) and the fallback (``_fallback``) expose
the same functions with identical semantics. Selection happens once at
import; set ``VCGST_PURE_PYTHON=1`` to force the fallback, or call
``set_backend`` (used by tests and the benchmark) to switch at runtime.
"""

from __future__ import annotations

import os

from . import _fallback

_BACKENDS = {"fallback": _fallback}
try:
    from . import _core  # compiled extension, absent until built

    _BACKENDS["compiled"] = _core
except ImportError:
    _core = None

if os.environ.get("VCGST_PURE_PYTHON"):
    _active = _fallback
else:
    _active = _core if _core is not None else _fallback


def backend_name() -> str:
    return _active.NAME


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def set_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}; "
                         f"available: {available_backends()}")
    _active = _BACKENDS[name]


def segment_sum(x, ptr):
    return _active.segment_sum(x, ptr)


def segment_repeat(y, ptr):
    return _active.segment_repeat(y, ptr)


def segment_softmax(logits, ptr):
    return _active.segment_softmax(logits, ptr)


def segment_softmax_grad(probs, grad, ptr):
    return _active.segment_softmax_grad(probs, grad, ptr)


def scatter_add_rows(out, idx, x):
    return _active.scatter_add_rows(out, idx, x)


def edge_attention_forward(K, Q, V, src, ptr, heads, inv_scale):
    return _active.edge_attention_forward(K, Q, V, src, ptr, heads, inv_scale)


def edge_attention_backward(K, Q, V, src, ptr, heads, inv_scale, probs,
                            grad_agg):
    return _active.edge_attention_backward(K, Q, V, src, ptr, heads,
                                           inv_scale, probs, grad_agg)

"""Central finite-difference verification of reverse-mode gradients."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .autodiff import Parameter, Tensor, backward


def check_gradients(loss_fn: Callable[[], Tensor], params: list[Parameter],
                    h: float = 1e-4, rtol: float = 1e-3, atol: float = 1e-6,
                    max_entries: int | None = None,
                    rng: np.random.Generator | None = None):
    """Compare analytic gradients of `loss_fn` against central differences.

    loss_fn must rebuild the forward computation from the live parameter
    values on every call. When `max_entries` is set, that many coordinates
    per parameter are sampled with `rng` instead of sweeping all of them.

    Returns (ok, worst) where worst is a dict describing the largest
    violation (empty when ok).
    """
    for p in params:
        p.zero_grad()
    loss = loss_fn()
    backward(loss)
    analytic = {id(p): p.grad.copy() for p in params}

    worst = {"err": 0.0}
    ok = True
    for p in params:
        flat = p.data.reshape(-1)
        n = flat.size
        if max_entries is not None and n > max_entries:
            if rng is None:
                rng = np.random.default_rng(0)
            coords = rng.choice(n, size=max_entries, replace=False)
        else:
            coords = range(n)
        for i in coords:
            orig = flat[i]
            flat[i] = orig + h
            lo_hi = float(loss_fn().data)
            flat[i] = orig - h
            lo_lo = float(loss_fn().data)
            flat[i] = orig
            numeric = (lo_hi - lo_lo) / (2.0 * h)
            a = float(analytic[id(p)].reshape(-1)[i])
            err = abs(a - numeric)
            bound = atol + rtol * max(abs(a), abs(numeric))
            if err > bound:
                ok = False
            rel = err / max(abs(a), abs(numeric), 1e-12)
            if err > bound and rel > worst.get("rel", -1.0):
                worst = {"err": err, "rel": rel, "param": getattr(p, "name", "?"),
                         "index": int(i), "analytic": a, "numeric": numeric}
    return ok, (worst if not ok else {})

#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the numpy fallback.

Times the segment primitives and the fused edge-attention forward/backward
on a synthetic ragged workload shaped like a busy training period, then a
full attention-layer pass through the autodiff tape under each backend.

Usage: python benchmarks/bench_kernels.py [--edges 200000] [--targets 20000]
"""

import argparse
import math
import time

import numpy as np

from vcgst import _kernels
from vcgst import autodiff as ad
from vcgst.gst import GstStack, Workspace, stack_apply


def make_workload(rng, n_targets, n_edges, n_nodes, d, heads):
    lens = rng.multinomial(n_edges, np.ones(n_targets) / n_targets)
    ptr = np.concatenate([[0], np.cumsum(lens)]).astype(np.int64)
    src = rng.integers(0, n_nodes, size=n_edges).astype(np.int64)
    K = rng.normal(size=(n_nodes, d))
    Q = rng.normal(size=(n_targets, d))
    V = rng.normal(size=(n_nodes, d))
    logits = rng.normal(size=(n_edges, heads))
    wide = rng.normal(size=(n_edges, d))
    return dict(src=src, ptr=ptr, K=K, Q=Q, V=V, logits=logits, wide=wide)


def time_call(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_primitives(w, heads, d):
    inv = 1.0 / math.sqrt(d // heads)
    probs = _kernels.segment_softmax(w["logits"], w["ptr"])
    grad = np.ones_like(w["K"][w["src"]])
    agg, p = _kernels.edge_attention_forward(w["K"], w["Q"], w["V"],
                                             w["src"], w["ptr"], heads, inv)
    gagg = np.ones_like(agg)
    cases = {
        "segment_sum": lambda: _kernels.segment_sum(w["wide"], w["ptr"]),
        "segment_softmax": lambda: _kernels.segment_softmax(w["logits"],
                                                            w["ptr"]),
        "segment_softmax_grad": lambda: _kernels.segment_softmax_grad(
            probs, w["logits"], w["ptr"]),
        "scatter_add_rows": lambda: _kernels.scatter_add_rows(
            np.zeros_like(w["K"]), w["src"], grad),
        "edge_attention_fwd": lambda: _kernels.edge_attention_forward(
            w["K"], w["Q"], w["V"], w["src"], w["ptr"], heads, inv),
        "edge_attention_bwd": lambda: _kernels.edge_attention_backward(
            w["K"], w["Q"], w["V"], w["src"], w["ptr"], heads, inv, p,
            gagg),
    }
    return {name: time_call(fn) for name, fn in cases.items()}


def bench_layer(w, heads, d, n_targets):
    """Full 1-layer stack forward+backward through the tape."""
    rng = np.random.default_rng(0)
    stack = GstStack.init(rng, 1, d, heads)
    ws = Workspace(target_ids=[str(i) for i in range(n_targets)],
                   frozen_ids=[str(i) for i in range(len(w["K"])
                                                     - n_targets)],
                   src=w["src"], ptr=w["ptr"])
    h_tgt = ad.Parameter(w["K"][:n_targets].copy(), "h")
    h_frz = ad.constant(w["K"][n_targets:])

    def run():
        h_tgt.zero_grad()
        out, _ = stack_apply(stack, h_tgt, h_frz, ws)
        ad.backward(ad.sum_all(out))

    return time_call(run, repeats=3)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--edges", type=int, default=200000)
    parser.add_argument("--targets", type=int, default=20000)
    parser.add_argument("--nodes", type=int, default=30000)
    parser.add_argument("--d", type=int, default=64)
    parser.add_argument("--heads", type=int, default=8)
    args = parser.parse_args()

    backends = _kernels.available_backends()
    print(f"backends available: {backends}")
    rng = np.random.default_rng(7)
    w = make_workload(rng, args.targets, args.edges, args.nodes, args.d,
                      args.heads)

    rows = {}
    layer = {}
    for backend in backends:
        _kernels.set_backend(backend)
        rows[backend] = bench_primitives(w, args.heads, args.d)
        layer[backend] = bench_layer(w, args.heads, args.d, args.targets)
    _kernels.set_backend(backends[-1] if "compiled" not in backends
                         else "compiled")

    names = list(next(iter(rows.values())))
    width = max(map(len, names + ["layer_fwd_bwd"])) + 2
    header = f"{'kernel':<{width}}" + "".join(f"{b:>14}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for name in names:
        line = f"{name:<{width}}"
        for b in backends:
            line += f"{rows[b][name] * 1e3:>12.2f}ms"
        if len(backends) == 2:
            line += f"{rows['fallback'][name] / rows['compiled'][name]:>9.1f}x"
        print(line)
    line = f"{'layer_fwd_bwd':<{width}}"
    for b in backends:
        line += f"{layer[b] * 1e3:>12.2f}ms"
    if len(backends) == 2:
        line += f"{layer['fallback'] / layer['compiled']:>9.1f}x"
    print(line)


if __name__ == "__main__":
    main()

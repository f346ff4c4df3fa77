# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the ragged attention hot path.

Must match ``_fallback.py`` function-for-function; the fallback docstrings
are the semantic reference. All loops are serial so results are
deterministic and independent of thread schedule.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, INFINITY

cnp.import_array()

NAME = "compiled"


def segment_sum(double[:, ::1] x, long[::1] ptr):
    cdef Py_ssize_t n_seg = ptr.shape[0] - 1
    cdef Py_ssize_t m = x.shape[1]
    out_arr = np.zeros((n_seg, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t t, e, j
    for t in range(n_seg):
        for e in range(ptr[t], ptr[t + 1]):
            for j in range(m):
                out[t, j] += x[e, j]
    return out_arr


def segment_repeat(double[:, ::1] y, long[::1] ptr):
    cdef Py_ssize_t n_seg = ptr.shape[0] - 1
    cdef Py_ssize_t m = y.shape[1]
    cdef Py_ssize_t n_e = ptr[n_seg]
    out_arr = np.empty((n_e, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t t, e, j
    for t in range(n_seg):
        for e in range(ptr[t], ptr[t + 1]):
            for j in range(m):
                out[e, j] = y[t, j]
    return out_arr


def segment_softmax(double[:, ::1] logits, long[::1] ptr):
    cdef Py_ssize_t n_seg = ptr.shape[0] - 1
    cdef Py_ssize_t h = logits.shape[1]
    out_arr = np.empty((logits.shape[0], h), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t t, e, j
    cdef double mx, denom
    for t in range(n_seg):
        for j in range(h):
            mx = -INFINITY
            for e in range(ptr[t], ptr[t + 1]):
                if logits[e, j] > mx:
                    mx = logits[e, j]
            denom = 0.0
            for e in range(ptr[t], ptr[t + 1]):
                out[e, j] = exp(logits[e, j] - mx)
                denom += out[e, j]
            for e in range(ptr[t], ptr[t + 1]):
                out[e, j] /= denom
    return out_arr


def segment_softmax_grad(double[:, ::1] probs, double[:, ::1] grad,
                         long[::1] ptr):
    cdef Py_ssize_t n_seg = ptr.shape[0] - 1
    cdef Py_ssize_t h = probs.shape[1]
    out_arr = np.empty((probs.shape[0], h), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t t, e, j
    cdef double inner
    for t in range(n_seg):
        for j in range(h):
            inner = 0.0
            for e in range(ptr[t], ptr[t + 1]):
                inner += probs[e, j] * grad[e, j]
            for e in range(ptr[t], ptr[t + 1]):
                out[e, j] = probs[e, j] * (grad[e, j] - inner)
    return out_arr


def scatter_add_rows(double[:, ::1] out, long[::1] idx, double[:, ::1] x):
    cdef Py_ssize_t n = idx.shape[0]
    cdef Py_ssize_t m = x.shape[1]
    cdef Py_ssize_t e, j, r
    for e in range(n):
        r = idx[e]
        for j in range(m):
            out[r, j] += x[e, j]
    return None


def edge_attention_forward(double[:, ::1] K, double[:, ::1] Q,
                           double[:, ::1] V, long[::1] src, long[::1] ptr,
                           Py_ssize_t heads, double inv_scale):
    cdef Py_ssize_t n_tgt = ptr.shape[0] - 1
    cdef Py_ssize_t n_e = src.shape[0]
    cdef Py_ssize_t d = K.shape[1]
    cdef Py_ssize_t dh = d // heads
    logits_arr = np.empty((n_e, heads), dtype=np.float64)
    cdef double[:, ::1] logits = logits_arr
    cdef Py_ssize_t t, e, i, j, s
    cdef double acc
    for t in range(n_tgt):
        for e in range(ptr[t], ptr[t + 1]):
            s = src[e]
            for i in range(heads):
                acc = 0.0
                for j in range(i * dh, (i + 1) * dh):
                    acc += K[s, j] * Q[t, j]
                logits[e, i] = acc * inv_scale
    probs_arr = segment_softmax(logits_arr, ptr)
    cdef double[:, ::1] probs = probs_arr
    agg_arr = np.zeros((n_tgt, d), dtype=np.float64)
    cdef double[:, ::1] agg = agg_arr
    cdef double p
    for t in range(n_tgt):
        for e in range(ptr[t], ptr[t + 1]):
            s = src[e]
            for i in range(heads):
                p = probs[e, i]
                for j in range(i * dh, (i + 1) * dh):
                    agg[t, j] += p * V[s, j]
    return agg_arr, probs_arr


def edge_attention_backward(double[:, ::1] K, double[:, ::1] Q,
                            double[:, ::1] V, long[::1] src, long[::1] ptr,
                            Py_ssize_t heads, double inv_scale,
                            double[:, ::1] probs, double[:, ::1] grad_agg):
    cdef Py_ssize_t n_tgt = ptr.shape[0] - 1
    cdef Py_ssize_t n_e = src.shape[0]
    cdef Py_ssize_t d = K.shape[1]
    cdef Py_ssize_t dh = d // heads
    dK_arr = np.zeros((K.shape[0], d), dtype=np.float64)
    dQ_arr = np.zeros((n_tgt, d), dtype=np.float64)
    dV_arr = np.zeros((V.shape[0], d), dtype=np.float64)
    dp_arr = np.empty((n_e, heads), dtype=np.float64)
    cdef double[:, ::1] dK = dK_arr
    cdef double[:, ::1] dQ = dQ_arr
    cdef double[:, ::1] dV = dV_arr
    cdef double[:, ::1] dp = dp_arr
    cdef Py_ssize_t t, e, i, j, s
    cdef double acc, p
    for t in range(n_tgt):
        for e in range(ptr[t], ptr[t + 1]):
            s = src[e]
            for i in range(heads):
                p = probs[e, i]
                acc = 0.0
                for j in range(i * dh, (i + 1) * dh):
                    dV[s, j] += p * grad_agg[t, j]
                    acc += V[s, j] * grad_agg[t, j]
                dp[e, i] = acc
    dlogit_arr = segment_softmax_grad(probs, dp_arr, ptr)
    cdef double[:, ::1] dlogit = dlogit_arr
    cdef double g
    for t in range(n_tgt):
        for e in range(ptr[t], ptr[t + 1]):
            s = src[e]
            for i in range(heads):
                g = dlogit[e, i] * inv_scale
                for j in range(i * dh, (i + 1) * dh):
                    dK[s, j] += g * Q[t, j]
                    dQ[t, j] += g * K[s, j]
    return dK_arr, dQ_arr, dV_arr

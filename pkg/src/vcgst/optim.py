"""Adaptive-moment gradient descent plus weight initialization helpers."""

from __future__ import annotations

import numpy as np

from .autodiff import Parameter


class Adam:
    """Adam with bias correction; updates are in-place and deterministic.

    Parameters are stepped in list order; moment buffers are keyed per
    parameter object, so a fresh Adam instance starts with zero moments.
    """

    def __init__(self, params: list[Parameter], lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        if lr <= 0:
            raise ValueError("learning rate must be positive")
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self._m = [np.zeros_like(p.data) for p in self.params]
        self._v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self) -> None:
        self.step_count += 1
        t = self.step_count
        bc1 = 1.0 - self.beta1 ** t
        bc2 = 1.0 - self.beta2 ** t
        for p, m, v in zip(self.params, self._m, self._v):
            g = p.grad
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p.data -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


def glorot(rng: np.random.Generator, out_dim: int, in_dim: int) -> np.ndarray:
    """Uniform +/- sqrt(6 / (fan_in + fan_out)) weight matrix."""
    limit = float(np.sqrt(6.0 / (in_dim + out_dim)))
    return rng.uniform(-limit, limit, size=(out_dim, in_dim))


def embedding_init(rng: np.random.Generator, n: int, d: int,
                   limit: float = 0.1) -> np.ndarray:
    """Uniform +/- limit rows for fresh node embeddings."""
    return rng.uniform(-limit, limit, size=(n, d))

"""Scoring functions: a linear model and a one-hidden-layer ReLU net.

Plain numpy forward/backward.  ``backward_margin`` accumulates
upstream * d g(x) / d theta into a gradient workspace, which is all a
margin-loss objective needs (the chain rule factor d loss / d g is the
caller's upstream).  The ReLU subgradient at 0 is 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["Mlp", "GradAccum", "init_mlp", "forward", "backward_margin"]


@dataclass
class Mlp:
    w1: np.ndarray  # (H, d); (1, d) when hidden == 0
    b1: np.ndarray  # (H,)
    w2: np.ndarray  # (H,)
    b2: np.ndarray  # (1,); kept as an array so the optimizer can update in place
    hidden: int

    @property
    def dim(self) -> int:
        return self.w1.shape[1]

    def parameters(self) -> list[np.ndarray]:
        if self.hidden == 0:
            return [self.w1, self.b2]
        return [self.w1, self.b1, self.w2, self.b2]

    def parameter_names(self) -> list[str]:
        if self.hidden == 0:
            return ["w1", "b2"]
        return ["w1", "b1", "w2", "b2"]


@dataclass
class GradAccum:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    hidden: int

    @classmethod
    def for_model(cls, m: Mlp) -> "GradAccum":
        return cls(
            w1=np.zeros_like(m.w1),
            b1=np.zeros_like(m.b1),
            w2=np.zeros_like(m.w2),
            b2=np.zeros_like(m.b2),
            hidden=m.hidden,
        )

    def zero(self):
        self.w1[...] = 0.0
        self.b1[...] = 0.0
        self.w2[...] = 0.0
        self.b2[...] = 0.0

    def gradients(self) -> list[np.ndarray]:
        if self.hidden == 0:
            return [self.w1, self.b2]
        return [self.w1, self.b1, self.w2, self.b2]


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int, shape) -> np.ndarray:
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape)


def init_mlp(d: int, hidden: int, seed: int) -> Mlp:
    """Glorot-uniform weights, zero biases; deterministic for a fixed seed."""
    if hidden < 0:
        raise ValueError("hidden must be >= 0")
    rng = np.random.default_rng(seed)
    if hidden == 0:
        w1 = _glorot(rng, d, 1, (1, d))
        return Mlp(w1=w1, b1=np.zeros(0), w2=np.zeros(0), b2=np.zeros(1), hidden=0)
    w1 = _glorot(rng, d, hidden, (hidden, d))
    w2 = _glorot(rng, hidden, 1, (hidden,))
    return Mlp(w1=w1, b1=np.zeros(hidden), w2=w2, b2=np.zeros(1), hidden=hidden)


def forward(m: Mlp, x):
    """Score one pattern (d,) -> float, or a batch (n, d) -> (n,)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xb = np.atleast_2d(x)
    if xb.shape[1] != m.dim:
        raise ValueError(f"pattern dimension {xb.shape[1]} != model dimension {m.dim}")
    if m.hidden == 0:
        out = xb @ m.w1[0] + m.b2[0]
    else:
        h = np.maximum(xb @ m.w1.T + m.b1, 0.0)
        out = h @ m.w2 + m.b2[0]
    return float(out[0]) if single else out


def backward_margin(m: Mlp, x, upstream, acc: GradAccum) -> None:
    """Accumulate sum_i upstream_i * d g(x_i) / d theta into ``acc``.

    ``x`` may be a single pattern with scalar upstream or a batch with a
    matching upstream vector.
    """
    x = np.asarray(x, dtype=float)
    xb = np.atleast_2d(x)
    u = np.broadcast_to(np.asarray(upstream, dtype=float), (xb.shape[0],))
    if xb.shape[1] != m.dim:
        raise ValueError(f"pattern dimension {xb.shape[1]} != model dimension {m.dim}")
    if m.hidden == 0:
        acc.w1[0] += u @ xb
        acc.b2[0] += u.sum()
        return
    pre = xb @ m.w1.T + m.b1
    h = np.maximum(pre, 0.0)
    acc.w2 += u @ h
    acc.b2[0] += u.sum()
    du_pre = (pre > 0.0) * (u[:, None] * m.w2[None, :])
    acc.w1 += du_pre.T @ xb
    acc.b1 += du_pre.sum(axis=0)

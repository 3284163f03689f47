"""AMSGrad updates.

Adam-style moments with a running elementwise maximum of the second
moment in the denominator:

    m <- b1*m + (1-b1)*g
    v <- b2*v + (1-b2)*g^2
    v_hat <- max(v_hat, v)
    theta <- theta - lr * (m / (1 - b1^t)) / (sqrt(v_hat) + eps)

Bias correction is applied to the first moment only; v_hat stays
uncorrected (framework implementations differ on this, so it is pinned
here).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["AmsGradState", "GradientError", "init_state", "step"]


class GradientError(ValueError):
    """A gradient block contained NaN or Inf; the step was aborted."""


@dataclass
class AmsGradState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)
    v_hat: list = field(default_factory=list)
    step_count: int = 0


def init_state(
    params, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8
) -> AmsGradState:
    return AmsGradState(
        lr=lr,
        beta1=beta1,
        beta2=beta2,
        eps=eps,
        m=[np.zeros_like(p) for p in params],
        v=[np.zeros_like(p) for p in params],
        v_hat=[np.zeros_like(p) for p in params],
        step_count=0,
    )


def step(state: AmsGradState, params, grads, names=None) -> None:
    """One in-place AMSGrad update of ``params``.

    Raises :class:`GradientError` (before touching any state) if a
    gradient block is non-finite.
    """
    if len(params) != len(state.m) or len(grads) != len(state.m):
        raise ValueError("parameter/gradient lists disagree with optimizer state")
    for i, g in enumerate(grads):
        if not np.all(np.isfinite(g)):
            block = names[i] if names is not None else f"block {i}"
            raise GradientError(f"non-finite gradient in {block}")
    state.step_count += 1
    t = state.step_count
    b1, b2 = state.beta1, state.beta2
    for p, g, m, v, vh in zip(params, grads, state.m, state.v, state.v_hat):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        np.maximum(vh, v, out=vh)
        m_hat = m / (1.0 - b1**t)
        p -= state.lr * m_hat / (np.sqrt(vh) + state.eps)

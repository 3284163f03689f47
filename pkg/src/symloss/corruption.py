"""Build contaminated samples from a clean labeled pool.

Mixing uses exact deterministic counts, not coin flips: the corrupted
positive sample contains round(pi * n) truly positive patterns, so the
realized contamination matches the requested one by construction.  The
two samples never share a pool element.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .risks import NoiseSpec

__all__ = ["LabeledPool", "BudgetError", "corrupt"]


class BudgetError(ValueError):
    """Pool too small to fill the requested sample composition."""


@dataclass
class LabeledPool:
    positives: np.ndarray
    negatives: np.ndarray

    def __post_init__(self):
        self.positives = np.atleast_2d(np.asarray(self.positives, dtype=float))
        self.negatives = np.atleast_2d(np.asarray(self.negatives, dtype=float))
        if self.positives.shape[0] == 0 or self.negatives.shape[0] == 0:
            raise ValueError("both classes of a labeled pool must be non-empty")
        if self.positives.shape[1] != self.negatives.shape[1]:
            raise ValueError("positive and negative patterns disagree in dimension")

    @property
    def dim(self) -> int:
        return self.positives.shape[1]


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def corrupt(
    pool: LabeledPool, noise: NoiseSpec, n_cp: int, n_cn: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Draw disjoint corrupted-positive and corrupted-negative samples.

    cp gets exactly round(pi * n_cp) positives (rest negatives), cn gets
    round(pi_prime * n_cn) positives.  All draws are uniform without
    replacement across both samples; each sample's row order is shuffled.
    Deterministic for a fixed seed.
    """
    if n_cp < 1 or n_cn < 1:
        raise ValueError("sample sizes must be positive")
    k_cp = _round_half_up(noise.pi * n_cp)
    k_cn = _round_half_up(noise.pi_prime * n_cn)
    need_pos = k_cp + k_cn
    need_neg = (n_cp - k_cp) + (n_cn - k_cn)
    if need_pos > pool.positives.shape[0]:
        raise BudgetError(
            f"need {need_pos} positive patterns but the pool has "
            f"{pool.positives.shape[0]}"
        )
    if need_neg > pool.negatives.shape[0]:
        raise BudgetError(
            f"need {need_neg} negative patterns but the pool has "
            f"{pool.negatives.shape[0]}"
        )
    rng = np.random.default_rng(seed)
    perm_pos = rng.permutation(pool.positives.shape[0])
    perm_neg = rng.permutation(pool.negatives.shape[0])
    cp = np.concatenate(
        [
            pool.positives[perm_pos[:k_cp]],
            pool.negatives[perm_neg[: n_cp - k_cp]],
        ]
    )
    cn = np.concatenate(
        [
            pool.positives[perm_pos[k_cp : k_cp + k_cn]],
            pool.negatives[perm_neg[n_cp - k_cp : n_cp - k_cp + (n_cn - k_cn)]],
        ]
    )
    cp = cp[rng.permutation(n_cp)]
    cn = cn[rng.permutation(n_cn)]
    return cp, cn

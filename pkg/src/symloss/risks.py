"""Exact BER and AUC risks on finite discrete distributions.

A :class:`DiscreteDist` carries one weight vector per class over a shared
pattern support, which makes population risks finite weighted sums.  The
contamination model mixes the two class-conditionals: the corrupted
positive marginal is ``pi * P + (1 - pi) * N`` and the corrupted negative
marginal is ``pi_prime * P + (1 - pi_prime) * N``.

The two ``verify_*`` functions evaluate a corrupted risk twice, once
directly from the mixtures and once through its decomposition

    corrupted = (pi - pi_prime) * clean + excess,

where the excess collects gamma terms, gamma(z) = l(z) + l(-z).  For a
symmetric loss gamma is the constant K and the excess collapses to
K * (1 - pi + pi_prime) / 2, independent of the scorer.  All sums use
exact-rounding accumulation (math.fsum) so that reconstruction defects on
desk-size supports stay below 1e-12.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .losses import Loss

__all__ = [
    "DiscreteDist",
    "NoiseSpec",
    "RiskDecomposition",
    "ber_risk",
    "ber_corr_risk",
    "auc_risk",
    "auc_corr_risk",
    "verify_ber_decomposition",
    "verify_auc_decomposition",
    "empirical_ber_corr",
    "empirical_auc_corr",
]

_WEIGHT_TOL = 1e-12


def _fsum(values) -> float:
    """Exactly-rounded sum of an array of float terms."""
    return math.fsum(np.asarray(values, dtype=float).ravel().tolist())


@dataclass(frozen=True)
class NoiseSpec:
    """Contamination pair: clean-positive fractions of the two samples.

    ``pi`` is the fraction of truly positive patterns in the corrupted
    positive sample, ``pi_prime`` the same fraction in the corrupted
    negative sample.  Clean data is (1, 0).
    """

    pi: float
    pi_prime: float

    def __post_init__(self):
        if not 0.0 < self.pi <= 1.0:
            raise ValueError(f"pi must be in (0, 1], got {self.pi}")
        if not 0.0 <= self.pi_prime < 1.0:
            raise ValueError(f"pi_prime must be in [0, 1), got {self.pi_prime}")
        if not self.pi > self.pi_prime:
            raise ValueError(
                f"need pi > pi_prime (got pi={self.pi}, pi_prime={self.pi_prime}); "
                "if the corrupted negative sample is the cleaner-positive one, "
                "swap the samples (equivalently, flip the classifier's labels)"
            )

    @property
    def scale(self) -> float:
        return self.pi - self.pi_prime


class DiscreteDist:
    """Finite support with one probability weight per class per point."""

    def __init__(self, patterns, w_pos, w_neg):
        patterns = np.asarray(patterns, dtype=float)
        if patterns.ndim == 1:
            patterns = patterns[:, None]
        w_pos = np.asarray(w_pos, dtype=float)
        w_neg = np.asarray(w_neg, dtype=float)
        if patterns.shape[0] != w_pos.shape[0] or patterns.shape[0] != w_neg.shape[0]:
            raise ValueError("patterns and weight vectors disagree in length")
        for name, w in (("w_pos", w_pos), ("w_neg", w_neg)):
            if np.any(w < 0):
                raise ValueError(f"{name} has a negative mass")
            if abs(_fsum(w) - 1.0) > _WEIGHT_TOL:
                raise ValueError(f"{name} must sum to 1 (got {_fsum(w)!r})")
        self.patterns = patterns
        self.w_pos = w_pos
        self.w_neg = w_neg

    def __len__(self) -> int:
        return self.patterns.shape[0]

    @property
    def dim(self) -> int:
        return self.patterns.shape[1]

    @classmethod
    def from_points(cls, points):
        """Build from an iterable of (pattern, mass_pos, mass_neg) triples."""
        xs, wp, wn = zip(*points)
        return cls(np.asarray(xs, dtype=float), wp, wn)

    @classmethod
    def from_json(cls, obj: dict) -> "DiscreteDist":
        """Schema: {"points": [{"x": [...], "p_pos": w, "p_neg": w}, ...]}."""
        try:
            pts = obj["points"]
            return cls.from_points(
                [(p["x"], p["p_pos"], p["p_neg"]) for p in pts]
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed discrete distribution JSON: {exc}") from None

    def to_json(self) -> dict:
        return {
            "points": [
                {"x": list(map(float, x)), "p_pos": float(p), "p_neg": float(n)}
                for x, p, n in zip(self.patterns, self.w_pos, self.w_neg)
            ]
        }


@dataclass(frozen=True)
class RiskDecomposition:
    """Both sides of a corrupted-risk identity and their disagreement."""

    corrupted_risk: float
    clean_risk: float
    scale: float
    excess: float
    reconstruction_defect: float


def _support_scores(dist: DiscreteDist, scorer) -> np.ndarray:
    return np.array([float(scorer(x)) for x in dist.patterns])


def ber_risk(loss: Loss, dist: DiscreteDist, scorer) -> float:
    """Balanced risk: 0.5 * (E_P[l(g(x))] + E_N[l(-g(x))])."""
    s = _support_scores(dist, scorer)
    return 0.5 * (
        _fsum(dist.w_pos * loss.eval(s)) + _fsum(dist.w_neg * loss.eval(-s))
    )


def ber_corr_risk(loss: Loss, dist: DiscreteDist, noise: NoiseSpec, scorer) -> float:
    """Balanced risk over the contaminated marginals.

    Computed directly from the mixture definition (independently of the
    decomposition used in :func:`verify_ber_decomposition`).
    """
    s = _support_scores(dist, scorer)
    lp, ln = loss.eval(s), loss.eval(-s)
    r_cp = _fsum(noise.pi * dist.w_pos * lp) + _fsum((1.0 - noise.pi) * dist.w_neg * lp)
    r_cn = _fsum(noise.pi_prime * dist.w_pos * ln) + _fsum(
        (1.0 - noise.pi_prime) * dist.w_neg * ln
    )
    return 0.5 * (r_cp + r_cn)


def auc_risk(loss: Loss, dist: DiscreteDist, scorer) -> float:
    """Pairwise risk: E_P[E_N[l(g(x_P) - g(x_N))]]."""
    s = _support_scores(dist, scorer)
    margins = s[:, None] - s[None, :]
    return _fsum(np.outer(dist.w_pos, dist.w_neg) * loss.eval(margins))


def auc_corr_risk(loss: Loss, dist: DiscreteDist, noise: NoiseSpec, scorer) -> float:
    """Pairwise risk with the corrupted marginals in place of P and N."""
    s = _support_scores(dist, scorer)
    margins = s[:, None] - s[None, :]
    m_cp = noise.pi * dist.w_pos + (1.0 - noise.pi) * dist.w_neg
    m_cn = noise.pi_prime * dist.w_pos + (1.0 - noise.pi_prime) * dist.w_neg
    return _fsum(np.outer(m_cp, m_cn) * loss.eval(margins))


def verify_ber_decomposition(
    loss: Loss, dist: DiscreteDist, noise: NoiseSpec, scorer
) -> RiskDecomposition:
    """Check  corrupted = scale * clean + (pi' E_P[gamma] + (1-pi) E_N[gamma]) / 2."""
    corrupted = ber_corr_risk(loss, dist, noise, scorer)
    clean = ber_risk(loss, dist, scorer)
    s = _support_scores(dist, scorer)
    gamma = loss.eval(s) + loss.eval(-s)
    excess = 0.5 * (
        noise.pi_prime * _fsum(dist.w_pos * gamma)
        + (1.0 - noise.pi) * _fsum(dist.w_neg * gamma)
    )
    defect = abs(corrupted - (noise.scale * clean + excess))
    return RiskDecomposition(corrupted, clean, noise.scale, excess, defect)


def verify_auc_decomposition(
    loss: Loss, dist: DiscreteDist, noise: NoiseSpec, scorer
) -> RiskDecomposition:
    """Check the pairwise identity with its three gamma excess terms.

    corrupted = scale * clean
              + (1-pi) pi'          * E_P[E_N[gamma]]
              + pi pi' / 2          * E_P'[E_P[gamma]]
              + (1-pi)(1-pi') / 2   * E_N'[E_N[gamma]].

    The same-class double expectations run over two independent copies of
    the same marginal; on a finite support the identity is exact with the
    diagonal included, because the double sum is already symmetric under
    swapping the copies.
    """
    corrupted = auc_corr_risk(loss, dist, noise, scorer)
    clean = auc_risk(loss, dist, scorer)
    s = _support_scores(dist, scorer)
    margins = s[:, None] - s[None, :]
    lv = loss.eval(margins)
    gamma = lv + lv.T
    e_pn = _fsum(np.outer(dist.w_pos, dist.w_neg) * gamma)
    e_pp = _fsum(np.outer(dist.w_pos, dist.w_pos) * gamma)
    e_nn = _fsum(np.outer(dist.w_neg, dist.w_neg) * gamma)
    pi, pip = noise.pi, noise.pi_prime
    excess = (
        (1.0 - pi) * pip * e_pn
        + 0.5 * pi * pip * e_pp
        + 0.5 * (1.0 - pi) * (1.0 - pip) * e_nn
    )
    defect = abs(corrupted - (noise.scale * clean + excess))
    return RiskDecomposition(corrupted, clean, noise.scale, excess, defect)


def empirical_ber_corr(loss: Loss, cp_sample, cn_sample, scorer) -> float:
    """Sample version of the corrupted balanced risk.

    0.5 * (mean over cp of l(g(x)) + mean over cn of l(-g(x))).
    """
    cp = np.atleast_2d(np.asarray(cp_sample, dtype=float))
    cn = np.atleast_2d(np.asarray(cn_sample, dtype=float))
    if cp.shape[0] == 0 or cn.shape[0] == 0:
        raise ValueError("empirical risk needs non-empty cp and cn samples")
    s_cp = np.array([float(scorer(x)) for x in cp])
    s_cn = np.array([float(scorer(x)) for x in cn])
    return 0.5 * (
        _fsum(loss.eval(s_cp)) / len(s_cp) + _fsum(loss.eval(-s_cn)) / len(s_cn)
    )


def empirical_auc_corr(
    loss: Loss,
    cp_sample,
    cn_sample,
    scorer,
    pair_budget: int = 250_000,
    seed: int = 0,
) -> float:
    """Sample version of the corrupted pairwise risk.

    Averages l(g(x_cp) - g(x_cn)) over all cp-cn pairs when their count
    fits the budget, and over a seeded uniform subsample of exactly
    ``pair_budget`` pairs otherwise.  Deterministic for a fixed seed.
    """
    cp = np.atleast_2d(np.asarray(cp_sample, dtype=float))
    cn = np.atleast_2d(np.asarray(cn_sample, dtype=float))
    if cp.shape[0] == 0 or cn.shape[0] == 0:
        raise ValueError("empirical risk needs non-empty cp and cn samples")
    if pair_budget < 1:
        raise ValueError(f"pair_budget must be >= 1, got {pair_budget}")
    s_cp = np.array([float(scorer(x)) for x in cp])
    s_cn = np.array([float(scorer(x)) for x in cn])
    n_pairs = len(s_cp) * len(s_cn)
    if n_pairs <= pair_budget:
        margins = s_cp[:, None] - s_cn[None, :]
        return _fsum(loss.eval(margins)) / n_pairs
    rng = np.random.default_rng(seed)
    i = rng.integers(0, len(s_cp), size=pair_budget)
    j = rng.integers(0, len(s_cn), size=pair_budget)
    return _fsum(loss.eval(s_cp[i] - s_cn[j])) / pair_budget

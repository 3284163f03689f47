"""Calibration checks, conditional-risk minimizers, and ranking probes.

For a symmetric loss the pointwise conditional risk

    C_eta(a) = eta * l(a) + (1 - eta) * l(-a) = (1 - eta) * K + (2*eta - 1) * l(a)

depends on a through a single l(a) term, so classification-calibration
reduces to the strict inequality inf_{a>0} l(a) < inf_{a<=0} l(a), the
excess-risk constant is the difference of those infima, and the minimizer
is M * sign(eta - 1/2) with M a minimizer of l.  Calibration does not by
itself make a symmetric loss suitable for pairwise ranking; this module
also builds the three-point counterexample demonstrating that, and a
randomized probe for ranking consistency.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .losses import Loss
from .risks import _fsum

__all__ = [
    "CalibrationReport",
    "EtaPoint",
    "RankFunctionTable",
    "check_calibration",
    "excess_risk_bound",
    "conditional_minimizer",
    "eta_recovery_probe",
    "pairwise_discrete_auc_risk",
    "counterexample_table",
    "auc_consistency_probe",
    "flat_except_unit_loss",
]

DEFAULT_STEP = 1e-3
DEFAULT_SPAN = (-10.0, 10.0)
_DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class CalibrationReport:
    loss_name: str
    inf_pos: float
    inf_nonpos: float
    calibrated: bool
    psi_slope: float
    excess_bound_denominator: float


@dataclass(frozen=True)
class EtaPoint:
    """Grid argmin of the conditional risk at one class probability."""

    eta: float
    alpha_grid: tuple[float, float, float]  # (lo, hi, step)
    minimizer: float
    minimum: float
    degenerate: bool


def check_calibration(loss: Loss) -> CalibrationReport:
    """Calibration verdict from the stored half-line infima.

    The loss is classification-calibrated iff inf_{a>0} l < inf_{a<=0} l;
    the (positive) gap is the slope of the linear transform that converts
    surrogate excess risk into a zero-one excess-risk bound.
    """
    slope = loss.inf_nonpos - loss.inf_pos
    return CalibrationReport(
        loss_name=loss.name,
        inf_pos=loss.inf_pos,
        inf_nonpos=loss.inf_nonpos,
        calibrated=slope > 0.0,
        psi_slope=slope,
        excess_bound_denominator=slope,
    )


def excess_risk_bound(loss: Loss, surrogate_excess: float) -> float:
    """Zero-one excess-risk bound: surrogate excess divided by the slope."""
    if surrogate_excess < 0.0:
        raise ValueError(f"surrogate excess must be >= 0, got {surrogate_excess}")
    report = check_calibration(loss)
    if not report.calibrated:
        raise ValueError(
            f"loss {loss.name!r} is not classification-calibrated; "
            "no excess risk bound exists"
        )
    return surrogate_excess / report.psi_slope


def _grid(loss: Loss, grid=None, step: float = DEFAULT_STEP) -> np.ndarray:
    lo, hi = grid if grid is not None else (loss.clamp_domain or DEFAULT_SPAN)
    n = int(round((hi - lo) / step))
    return lo + step * np.arange(n + 1)


def conditional_minimizer(
    loss: Loss, eta: float, grid=None, step: float = DEFAULT_STEP
) -> EtaPoint:
    """Grid argmin of C_eta(a) = eta*l(a) + (1-eta)*l(-a).

    The grid defaults to the loss's clamp domain, or [-10, 10] when the
    loss is unclamped.  Ties break toward the smallest |a|.  When the
    conditional risk is constant over the grid (a symmetric loss at
    eta = 1/2) the point is flagged degenerate and the minimizer is the
    smallest-|a| grid point.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must be in [0, 1], got {eta}")
    alphas = _grid(loss, grid, step)
    values = eta * loss.eval(alphas) + (1.0 - eta) * loss.eval(-alphas)
    lo, hi = float(alphas[0]), float(alphas[-1])
    vmin = float(values.min())
    vmax = float(values.max())
    scale = max(1.0, abs(vmin), abs(vmax))
    degenerate = (vmax - vmin) <= _DEGENERATE_TOL * scale
    tied = alphas[values <= vmin + _DEGENERATE_TOL * scale]
    minimizer = float(tied[np.argmin(np.abs(tied))])
    return EtaPoint(
        eta=float(eta),
        alpha_grid=(lo, hi, step),
        minimizer=minimizer,
        minimum=vmin,
        degenerate=bool(degenerate),
    )


def eta_recovery_probe(loss: Loss, etas, grid=None, step: float = DEFAULT_STEP) -> bool:
    """True iff distinct class probabilities map to distinct minimizers.

    Losses whose conditional minimizer is a scaled sign cannot tell
    eta = 0.6 from eta = 0.9, so the class probability is unrecoverable
    from a learned scorer.  Minimizers closer than two grid steps count
    as equal.
    """
    etas = sorted(set(float(e) for e in etas))
    if len(etas) < 2:
        raise ValueError("need at least two distinct eta values")
    mins = [conditional_minimizer(loss, e, grid=grid, step=step).minimizer for e in etas]
    for a, b in itertools.combinations(mins, 2):
        if abs(a - b) <= 2.0 * step:
            return False
    return True


def pairwise_discrete_auc_risk(loss: Loss, supports, scorer) -> float:
    """Scorer-dependent part of the pairwise ranking risk on a uniform support.

    For points x_i with class probabilities eta_i, returns

        sum over ordered pairs i != j of (eta_i - eta_j) * l(g(x_i) - g(x_j)).

    Additive and positive multiplicative constants are dropped, so values
    are only meaningful for comparing scorers on the same support.
    """
    supports = list(supports)
    if len(supports) < 2:
        raise ValueError("need at least two support points")
    patterns = [np.asarray(x, dtype=float) for x, _ in supports]
    etas = [float(e) for _, e in supports]
    scores = [float(scorer(x)) for x in patterns]
    terms = [
        (etas[i] - etas[j]) * float(loss.eval(scores[i] - scores[j]))
        for i in range(len(supports))
        for j in range(len(supports))
        if i != j
    ]
    return math.fsum(terms)


def flat_except_unit_loss() -> Loss:
    """A symmetric step loss: 0 at z=1, 1 at z=-1, 0.5 everywhere else.

    Classification-calibrated (0 < 0.5) yet useless for ranking: it only
    rewards margins that are exactly 1, so a scorer can collect rewards
    on ties instead of ordering the points.
    """

    def ev(z):
        z = np.asarray(z, float)
        return np.where(z == 1.0, 0.0, np.where(z == -1.0, 1.0, 0.5))

    return Loss(
        name="flat_except_unit",
        eval=ev,
        deriv=None,
        symmetry_constant=1.0,
        inf_pos=0.0,
        inf_nonpos=0.5,
        convex=False,
        recovers_eta=False,
        argmin=1.0,
        minimizer_formula="sign(eta - 1/2)",
    )


@dataclass(frozen=True)
class RankFunctionTable:
    """Four scorers on a three-point support and their pairwise-loss book.

    ``pair_losses[k][c]`` is the flat_except_unit value on ordered pair
    ``pair_rows[k]`` under scorer ``function_names[c]``; ``scores`` are
    the eta-gap-weighted column sums (lower is better).  The minimizers
    put equal scores on points whose class probabilities differ, so the
    risk minimizer is not a correct ranker.
    """

    patterns: tuple
    etas: tuple
    function_names: tuple
    function_scores: dict
    pair_rows: tuple
    eta_gaps: tuple
    pair_losses: tuple
    scores: dict
    minimizers: frozenset


def _flat_fraction(margin: Fraction) -> Fraction:
    if margin == 1:
        return Fraction(0)
    if margin == -1:
        return Fraction(1)
    return Fraction(1, 2)


def counterexample_table() -> RankFunctionTable:
    """Exact ranking counterexample on the uniform three-point support.

    Built in rational arithmetic; the returned floats are exact halves.
    Raises if the computed book violates its own expected structure
    (minimizer set {g1, g4}, with the order-respecting g2 strictly worse).
    """
    etas = (Fraction(1), Fraction(1, 2), Fraction(0))
    functions = {
        "g1": (Fraction(1), Fraction(0), Fraction(0)),
        "g2": (Fraction(2), Fraction(1), Fraction(0)),
        "g3": (Fraction(0), Fraction(0), Fraction(0)),
        "g4": (Fraction(1), Fraction(1), Fraction(0)),
    }
    names = tuple(functions)
    pair_rows = ((0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1))
    gaps = tuple(etas[i] - etas[j] for i, j in pair_rows)

    losses = []
    for i, j in pair_rows:
        losses.append(
            tuple(_flat_fraction(functions[g][i] - functions[g][j]) for g in names)
        )
    scores = {
        g: sum(gaps[k] * losses[k][c] for k in range(len(pair_rows)))
        for c, g in enumerate(names)
    }
    best = min(scores.values())
    minimizers = frozenset(g for g in names if scores[g] == best)
    if minimizers != frozenset({"g1", "g4"}):
        raise AssertionError(f"unexpected minimizer set {sorted(minimizers)}")
    if not scores["g2"] > best:
        raise AssertionError("order-respecting scorer g2 should be strictly worse")

    return RankFunctionTable(
        patterns=(0.0, 1.0, 2.0),
        etas=tuple(float(e) for e in etas),
        function_names=names,
        function_scores={g: tuple(float(v) for v in functions[g]) for g in names},
        pair_rows=pair_rows,
        eta_gaps=tuple(float(g) for g in gaps),
        pair_losses=tuple(tuple(float(v) for v in row) for row in losses),
        scores={g: float(scores[g]) for g in names},
        minimizers=minimizers,
    )


def _weak_orderings(k: int):
    """All assignments of levels 0..m (m < k) to k items, levels all used."""
    for levels in itertools.product(range(k), repeat=k):
        used = set(levels)
        if used == set(range(len(used))):
            yield levels


def _violates_bayes_order(scores, etas) -> bool:
    for i in range(len(etas)):
        for j in range(len(etas)):
            if etas[i] != etas[j]:
                if (scores[i] - scores[j]) * (etas[i] - etas[j]) <= 0.0:
                    return True
    return False


def _probe_instance(loss: Loss, etas, candidates) -> bool:
    """True when every minimizing candidate respects the correct order."""
    patterns = [np.array([float(i)]) for i in range(len(etas))]
    supports = list(zip(patterns, etas))
    risks = []
    for cand in candidates:
        table = {float(i): float(cand[i]) for i in range(len(cand))}
        risks.append(
            pairwise_discrete_auc_risk(loss, supports, lambda x: table[float(x[0])])
        )
    risks = np.asarray(risks)
    best = risks.min()
    tol = 1e-11 * max(1.0, abs(best))
    for idx in np.flatnonzero(risks <= best + tol):
        if _violates_bayes_order(candidates[idx], etas):
            return False
    return True


def _candidate_scorers(k: int, rng: np.random.Generator):
    spacings = (0.5, 1.0, 2.0)
    cands = []
    if k <= 4:
        for levels in _weak_orderings(k):
            for d in spacings:
                cands.append(tuple(d * l for l in levels))
    else:
        # Too many orderings: random restarts (evidence only, not a proof).
        for _ in range(150):
            levels = rng.integers(0, k, size=k)
            d = spacings[rng.integers(0, len(spacings))]
            cands.append(tuple(float(d * l) for l in levels))
        for _ in range(50):
            cands.append(tuple(rng.uniform(-2.0, 2.0, size=k)))
    return cands


def _sorted_candidates(etas, k: int):
    order = np.argsort(np.argsort(etas))
    return [tuple(float(d * o) for o in order) for d in (0.5, 1.0, 2.0)]


def auc_consistency_probe(loss: Loss, trials: int = 100, seed: int = 0) -> bool:
    """Randomized search for ranking-inconsistency witnesses.

    Each trial draws a small support with random class probabilities and
    minimizes the pairwise risk over a family of candidate scorers
    (exhaustive over score weak orderings for up to four points, random
    restarts above).  Returns False as soon as some minimizer puts a
    wrongly-ordered or tied score on a pair with distinct class
    probabilities; such a witness proves the loss is not a consistent
    ranking surrogate.  Returning True is evidence, not a proof.

    The canonical three-point support with probabilities (1, 1/2, 0) is
    always probed first.
    """
    if not loss.symmetric:
        raise ValueError(
            f"loss {loss.name!r} is not symmetric; the probe relies on the "
            "single-term rewriting of the pairwise conditional risk"
        )
    rng0 = np.random.default_rng(np.random.SeedSequence((seed, 0xC0)))
    canonical = (1.0, 0.5, 0.0)
    cands = _candidate_scorers(3, rng0) + _sorted_candidates(canonical, 3)
    if not _probe_instance(loss, canonical, cands):
        return False
    for t in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence((seed, t)))
        k = int(rng.integers(3, 7))
        etas = tuple(rng.uniform(0.0, 1.0, size=k))
        cands = _candidate_scorers(k, rng) + _sorted_candidates(etas, k)
        if not _probe_instance(loss, etas, cands):
            return False
    return True

"""Numeric verification sweeps behind the CLI ``verify`` subcommand.

Each suite runs a randomized sweep of one family of identities or
expectations and returns a report dict with the worst observed defect;
``passed`` is the CI gate.  Sweeps are deterministic for a fixed seed.
"""

from __future__ import annotations

import itertools
import math
import time

import numpy as np

from .calibration import (
    check_calibration,
    conditional_minimizer,
    counterexample_table,
    eta_recovery_probe,
)
from .losses import Loss, loss_descriptor, make_loss, zoo
from .risks import (
    DiscreteDist,
    NoiseSpec,
    verify_auc_decomposition,
    verify_ber_decomposition,
)

__all__ = [
    "NOISE_GRID",
    "DEFECT_TOL",
    "random_dist",
    "table_scorer",
    "ber_suite",
    "auc_suite",
    "calibration_suite",
    "counterexample_suite",
    "run_suite",
    "SUITES",
]

NOISE_GRID = (
    NoiseSpec(1.0, 0.0),
    NoiseSpec(0.8, 0.3),
    NoiseSpec(0.7, 0.4),
    NoiseSpec(0.65, 0.45),
)
DEFECT_TOL = 1e-12


def random_dist(rng: np.random.Generator, max_points: int = 20, dim: int = 2) -> DiscreteDist:
    """A random finite support with independent class weight vectors."""
    n = int(rng.integers(2, max_points + 1))
    patterns = rng.normal(size=(n, dim))
    w_pos = rng.uniform(0.1, 1.0, size=n)
    w_neg = rng.uniform(0.1, 1.0, size=n)
    return DiscreteDist(patterns, w_pos / w_pos.sum(), w_neg / w_neg.sum())


def table_scorer(dist: DiscreteDist, scores) -> callable:
    """Scorer assigning a fixed score to each support pattern."""
    table = {x.tobytes(): float(s) for x, s in zip(dist.patterns, scores)}
    return lambda x: table[np.asarray(x, float).tobytes()]


def _decomposition_sweep(kind: str, seed: int, n_dists: int, n_scorers: int) -> dict:
    verify = verify_ber_decomposition if kind == "ber" else verify_auc_decomposition
    rng = np.random.default_rng(seed)
    dists = [random_dist(rng) for _ in range(n_dists)]
    worst = {"defect": -1.0}
    cases = 0
    t0 = time.perf_counter()
    for loss in zoo():
        for d_idx, dist in enumerate(dists):
            scorer_sets = [rng.uniform(-3.0, 3.0, size=len(dist)) for _ in range(n_scorers)]
            for noise in NOISE_GRID:
                for s_idx, scores in enumerate(scorer_sets):
                    dec = verify(loss, dist, noise, table_scorer(dist, scores))
                    cases += 1
                    if dec.reconstruction_defect > worst["defect"]:
                        worst = {
                            "defect": dec.reconstruction_defect,
                            "loss": loss_descriptor(loss),
                            "dist_index": d_idx,
                            "noise": [noise.pi, noise.pi_prime],
                            "scorer_index": s_idx,
                        }
    return {
        "suite": kind,
        "cases": cases,
        "tolerance": DEFECT_TOL,
        "max_defect": worst["defect"],
        "worst_case": worst,
        "elapsed_s": round(time.perf_counter() - t0, 3),
        "passed": worst["defect"] <= DEFECT_TOL,
    }


def ber_suite(seed: int = 0, n_dists: int = 20, n_scorers: int = 5) -> dict:
    """Balanced-risk decomposition identity over a randomized sweep."""
    return _decomposition_sweep("ber", seed, n_dists, n_scorers)


def auc_suite(seed: int = 0, n_dists: int = 20, n_scorers: int = 5) -> dict:
    """Pairwise-risk decomposition identity over a randomized sweep."""
    return _decomposition_sweep("auc", seed, n_dists, n_scorers)


_EXPECTED_FLAGS = {
    # name: (symmetric, recovers_eta)
    "zero_one": (True, False),
    "squared": (False, True),
    "hinge": (False, False),
    "logistic": (False, True),
    "savage": (False, True),
    "ramp": (True, False),
    "sigmoid": (True, False),
    "unhinged": (True, False),
}

_PROBE_ETAS = (0.6, 0.7, 0.9)


def closed_form_minimizer(loss: Loss, eta: float) -> float:
    """The loss's analytic conditional-risk minimizer at class probability eta."""
    if loss.name == "squared":
        return 2.0 * eta - 1.0
    if loss.name == "logistic":
        return math.log(eta / (1.0 - eta))
    if loss.name == "savage":
        return 0.5 * math.log(eta / (1.0 - eta))
    m = loss.argmin if loss.argmin is not None else 1.0
    return m * float(np.sign(eta - 0.5))


def calibration_suite(seed: int = 0) -> dict:
    """Named-loss calibration flags, recovery flags, and minimizer formulas."""
    t0 = time.perf_counter()
    failures = []
    calibrated_count = 0
    worst_dev = 0.0
    step = 1e-3
    for name, (symmetric, recovers) in _EXPECTED_FLAGS.items():
        loss = make_loss(name)
        report = check_calibration(loss)
        if report.calibrated:
            calibrated_count += 1
        else:
            failures.append(f"{name}: expected classification-calibrated")
        if loss.symmetric != symmetric:
            failures.append(f"{name}: symmetric flag should be {symmetric}")
        if eta_recovery_probe(loss, _PROBE_ETAS) != recovers:
            failures.append(f"{name}: recovery probe should return {recovers}")
        for eta in (0.1, 0.2, 0.3, 0.4, 0.6, 0.7, 0.8, 0.9):
            point = conditional_minimizer(loss, eta, step=step)
            expected = closed_form_minimizer(loss, eta)
            dev = abs(point.minimizer - expected)
            if name == "zero_one":
                # The minimum sits on a half-line plateau; any point of the
                # right sign attains it, so compare achieved risk instead.
                expected_val = eta * float(loss.eval(expected)) + (1 - eta) * float(
                    loss.eval(-expected)
                )
                dev = abs(point.minimum - expected_val)
                sign_ok = np.sign(point.minimizer) == np.sign(eta - 0.5)
                if dev > 1e-9 or not sign_ok:
                    failures.append(f"{name}: plateau minimizer mismatch at eta={eta}")
                continue
            worst_dev = max(worst_dev, dev)
            if dev > 2.0 * step:
                failures.append(
                    f"{name}: minimizer {point.minimizer} != {expected} at eta={eta}"
                )
    return {
        "suite": "calibration",
        "losses_checked": len(_EXPECTED_FLAGS),
        "calibrated": calibrated_count,
        "max_minimizer_deviation": worst_dev,
        "tolerance": 2.0 * step,
        "failures": failures,
        "elapsed_s": round(time.perf_counter() - t0, 3),
        "passed": not failures,
    }


def counterexample_suite(seed: int = 0) -> dict:
    """Exactness of the three-point ranking counterexample."""
    t0 = time.perf_counter()
    failures = []
    table = counterexample_table()
    expected_scores = {"g1": -1.5, "g2": -1.0, "g3": 0.0, "g4": -1.5}
    for g, want in expected_scores.items():
        if table.scores[g] != want:
            failures.append(f"score of {g} is {table.scores[g]}, expected {want}")
    if table.minimizers != frozenset({"g1", "g4"}):
        failures.append(f"minimizers {sorted(table.minimizers)} != ['g1', 'g4']")
    expected_rows = (
        (0.0, 0.0, 0.5, 0.5),
        (0.0, 0.5, 0.5, 0.0),
        (1.0, 1.0, 0.5, 0.5),
        (0.5, 0.0, 0.5, 0.0),
        (1.0, 0.5, 0.5, 1.0),
        (0.5, 1.0, 0.5, 1.0),
    )
    if table.pair_losses != expected_rows:
        failures.append("pairwise loss table deviates from the expected entries")
    return {
        "suite": "counterexample",
        "scores": table.scores,
        "minimizers": sorted(table.minimizers),
        "failures": failures,
        "elapsed_s": round(time.perf_counter() - t0, 3),
        "passed": not failures,
    }


SUITES = {
    "ber": ber_suite,
    "auc": auc_suite,
    "calibration": calibration_suite,
    "counterexample": counterexample_suite,
}


def run_suite(name: str, seed: int = 0) -> dict:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r} (expected one of {sorted(SUITES)})")
    return SUITES[name](seed=seed)

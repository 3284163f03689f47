"""Dataset loading (sparse LIBSVM text, CSV) and synthetic benchmarks."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .corruption import LabeledPool

__all__ = [
    "Dataset",
    "ParseError",
    "parse_libsvm",
    "to_libsvm",
    "parse_csv",
    "gen_gaussians",
    "split",
    "standardize",
]


class ParseError(ValueError):
    """Malformed dataset text; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class Dataset:
    patterns: np.ndarray
    labels: np.ndarray
    feature_dim: int
    source: str = ""

    def __post_init__(self):
        self.patterns = np.atleast_2d(np.asarray(self.patterns, dtype=float))
        self.labels = np.asarray(self.labels, dtype=int)
        if self.patterns.shape[0] < 1:
            raise ValueError("a dataset needs at least one row")
        if self.patterns.shape[0] != self.labels.shape[0]:
            raise ValueError("patterns and labels disagree in length")
        if not np.all(np.isin(self.labels, (-1, 1))):
            raise ValueError("labels must be -1 or +1")
        if not np.all(np.isfinite(self.patterns)):
            raise ValueError("patterns contain NaN or Inf")

    def __len__(self) -> int:
        return self.patterns.shape[0]


def _as_lines(stream):
    if isinstance(stream, str):
        return stream.splitlines()
    return [line.rstrip("\n") for line in stream]


def _map_labels(raw: list[float]) -> np.ndarray:
    distinct = sorted(set(raw))
    if len(distinct) > 2:
        raise ValueError(f"more than two distinct labels: {distinct}")
    if len(distinct) == 2:
        lo, hi = distinct
        return np.array([-1 if v == lo else 1 for v in raw], dtype=int)
    # One class only: acceptable iff the raw label already is -1 or +1.
    if distinct[0] in (-1.0, 1.0):
        return np.full(len(raw), int(distinct[0]), dtype=int)
    raise ValueError(
        f"single distinct label {distinct[0]!r} cannot be mapped to -1/+1"
    )


def parse_libsvm(stream) -> Dataset:
    """Parse ``<label> <index>:<value> ...`` lines into a dense Dataset.

    Indices are 1-based and must be strictly increasing within a line;
    absent indices are zero.  The two distinct raw labels map to -1/+1 in
    ascending order.
    """
    rows: list[dict[int, float]] = []
    raw_labels: list[float] = []
    max_index = 0
    n_lines = 0
    for lineno, line in enumerate(_as_lines(stream), start=1):
        if not line.strip():
            continue
        n_lines += 1
        tokens = line.split()
        try:
            raw_labels.append(float(tokens[0]))
        except ValueError:
            raise ParseError(f"malformed label token {tokens[0]!r}", lineno) from None
        row: dict[int, float] = {}
        prev = 0
        for tok in tokens[1:]:
            idx_s, sep, val_s = tok.partition(":")
            if not sep:
                raise ParseError(f"malformed feature token {tok!r}", lineno)
            try:
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise ParseError(f"malformed feature token {tok!r}", lineno) from None
            if idx <= 0:
                raise ParseError(f"feature index must be >= 1, got {idx}", lineno)
            if idx <= prev:
                raise ParseError(
                    f"non-increasing index {idx} after {prev}", lineno
                )
            prev = idx
            row[idx] = val
            max_index = max(max_index, idx)
        rows.append(row)
    if n_lines == 0:
        raise ParseError("empty input", 1)
    try:
        labels = _map_labels(raw_labels)
    except ValueError as exc:
        raise ParseError(str(exc), 1) from None
    patterns = np.zeros((len(rows), max_index))
    for i, row in enumerate(rows):
        for idx, val in row.items():
            patterns[i, idx - 1] = val
    return Dataset(patterns, labels, feature_dim=max_index, source="libsvm")


def to_libsvm(ds: Dataset) -> str:
    """Serialize densely with 17 significant digits (exact round trip)."""
    lines = []
    for x, y in zip(ds.patterns, ds.labels):
        feats = " ".join(f"{j + 1}:{v:.17g}" for j, v in enumerate(x))
        lines.append(f"{int(y):+d} {feats}".rstrip())
    return "\n".join(lines) + "\n"


def parse_csv(stream, label_column: int) -> Dataset:
    """Parse a rectangular numeric CSV; one column holds the two labels.

    A header row is skipped iff the first row has a non-numeric cell.
    """
    text = stream if isinstance(stream, str) else stream.read()
    reader = list(csv.reader(io.StringIO(text)))
    reader = [row for row in reader if any(cell.strip() for cell in row)]
    if not reader:
        raise ParseError("empty input", 1)

    def numeric(row):
        try:
            return [float(c) for c in row]
        except ValueError:
            return None

    start = 0
    if numeric(reader[0]) is None:
        start = 1
        if len(reader) == 1:
            raise ParseError("only a header row present", 1)
    width = len(reader[start])
    if not 0 <= label_column < width:
        raise ValueError(
            f"label column {label_column} out of range for {width} columns"
        )
    rows = []
    raw_labels = []
    for lineno, row in enumerate(reader[start:], start=start + 1):
        if len(row) != width:
            raise ParseError(
                f"ragged row ({len(row)} cells, expected {width})", lineno
            )
        values = numeric(row)
        if values is None:
            raise ParseError("non-numeric cell", lineno)
        raw_labels.append(values[label_column])
        rows.append([v for j, v in enumerate(values) if j != label_column])
    try:
        labels = _map_labels(raw_labels)
    except ValueError as exc:
        raise ParseError(str(exc), start + 1) from None
    return Dataset(np.asarray(rows), labels, feature_dim=width - 1, source="csv")


def gen_gaussians(
    d: int, n_pos: int, n_neg: int, separation: float, seed: int
) -> Dataset:
    """Two unit-covariance Gaussian classes with mean distance ``separation``.

    The class means are +-mu with mu = (separation/2) * ones/sqrt(d), so
    the optimal balanced accuracy is Phi(separation/2) regardless of d.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if separation < 0:
        raise ValueError("separation must be >= 0")
    rng = np.random.default_rng(seed)
    mu = (separation / 2.0) * np.ones(d) / math.sqrt(d)
    pos = rng.normal(size=(n_pos, d)) + mu
    neg = rng.normal(size=(n_neg, d)) - mu
    patterns = np.concatenate([pos, neg])
    labels = np.concatenate([np.ones(n_pos, dtype=int), -np.ones(n_neg, dtype=int)])
    return Dataset(
        patterns,
        labels,
        feature_dim=d,
        source=f"gauss:d={d}:sep={separation:g}:seed={seed}",
    )


def split(
    ds: Dataset, test_fraction: float, balanced_test: bool, seed: int
) -> tuple[LabeledPool, Dataset]:
    """Split into a training pool and a held-out test set.

    With ``balanced_test`` the test set holds the same number of rows per
    class (round(test_fraction * n) total, rounded down to even).
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    pos_idx = np.flatnonzero(ds.labels == 1)
    neg_idx = np.flatnonzero(ds.labels == -1)
    n_test = int(math.floor(test_fraction * len(ds) + 0.5))
    if balanced_test:
        per_class = n_test // 2
        if per_class < 1:
            raise ValueError("test fraction too small for a balanced test set")
        if per_class > len(pos_idx) or per_class > len(neg_idx):
            raise ValueError(
                f"balanced test of {per_class} per class exceeds class sizes "
                f"({len(pos_idx)} positive, {len(neg_idx)} negative)"
            )
        t_pos, t_neg = per_class, per_class
    else:
        t_pos = int(math.floor(len(pos_idx) * test_fraction + 0.5))
        t_neg = n_test - t_pos
        if t_neg > len(neg_idx):
            raise ValueError("test split exceeds the negative class size")
    pos_perm = pos_idx[rng.permutation(len(pos_idx))]
    neg_perm = neg_idx[rng.permutation(len(neg_idx))]
    test_idx = np.concatenate([pos_perm[:t_pos], neg_perm[:t_neg]])
    test = Dataset(
        ds.patterns[test_idx],
        ds.labels[test_idx],
        feature_dim=ds.feature_dim,
        source=ds.source,
    )
    pool = LabeledPool(
        positives=ds.patterns[pos_perm[t_pos:]],
        negatives=ds.patterns[neg_perm[t_neg:]],
    )
    return pool, test


def standardize(pool: LabeledPool, test: Dataset) -> tuple[LabeledPool, Dataset]:
    """Per-feature z-score fit on the pool, applied to pool and test."""
    stacked = np.concatenate([pool.positives, pool.negatives])
    mean = stacked.mean(axis=0)
    std = stacked.std(axis=0)
    std[std == 0.0] = 1.0
    new_pool = LabeledPool(
        positives=(pool.positives - mean) / std,
        negatives=(pool.negatives - mean) / std,
    )
    new_test = Dataset(
        (test.patterns - mean) / std,
        test.labels,
        feature_dim=test.feature_dim,
        source=test.source,
    )
    return new_pool, new_test

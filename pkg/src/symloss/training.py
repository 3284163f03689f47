"""Minibatch training of the corrupted balanced or pairwise objective.

A run is declared by an :class:`ExperimentConfig`; :func:`train` loads
(or generates) the data, builds disjoint contaminated samples, fits the
scorer with AMSGrad, and evaluates balanced accuracy and the ranking
score on the clean held-out test set after every epoch.  Everything is
deterministic given the config seed: all randomness is derived from it
through named seed streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from . import amsgrad, mlp
from .corruption import LabeledPool, corrupt
from .data import Dataset, gen_gaussians, parse_csv, parse_libsvm, split, standardize
from .losses import Loss, parse_loss_descriptor
from .risks import NoiseSpec

__all__ = [
    "OptimizerParams",
    "ExperimentConfig",
    "EpochRecord",
    "train",
    "eval_bac",
    "eval_auc",
]


@dataclass(frozen=True)
class OptimizerParams:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class ExperimentConfig:
    loss: str = "sigmoid"
    noise: NoiseSpec = field(default_factory=lambda: NoiseSpec(1.0, 0.0))
    objective: str = "ber"  # "ber" or "auc"
    hidden: int = 32
    optimizer: OptimizerParams = field(default_factory=OptimizerParams)
    epochs: int = 50
    batch_size: int = 500
    pair_budget: int = 250_000
    seed: int = 0
    data: str = "gauss:2:4"
    n_cp: int = 500
    n_cn: int = 500
    n_test: int = 500
    standardize: bool = True

    def __post_init__(self):
        if self.objective not in ("ber", "auc"):
            raise ValueError(f"objective must be 'ber' or 'auc', got {self.objective!r}")
        for name in ("epochs", "batch_size", "n_cp", "n_cn", "n_test"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.pair_budget < 1:
            raise ValueError("pair_budget must be positive")
        if self.hidden < 0:
            raise ValueError("hidden must be >= 0")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_objective: float
    test_bac: float
    test_auc: float


def _seed_stream(root: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((root,) + key))


def _child_seed(root: int, *key: int) -> int:
    return int(np.random.SeedSequence((root,) + key).generate_state(1)[0])


def _load_source(descriptor: str, config: ExperimentConfig) -> Dataset:
    kind, _, rest = descriptor.partition(":")
    if kind == "gauss":
        parts = rest.split(":")
        if len(parts) != 2:
            raise ValueError(f"gauss source needs 'gauss:<d>:<sep>', got {descriptor!r}")
        d, sep = int(parts[0]), float(parts[1])
        per_class = config.n_cp + config.n_cn + config.n_test
        return gen_gaussians(d, per_class, per_class, sep, _child_seed(config.seed, 1))
    if kind == "libsvm":
        with open(rest, "r", encoding="utf-8") as fh:
            return parse_libsvm(fh)
    if kind == "csv":
        path, _, col = rest.rpartition(":")
        if not path:
            raise ValueError(f"csv source needs 'csv:<path>:<labelcol>', got {descriptor!r}")
        with open(path, "r", encoding="utf-8") as fh:
            return parse_csv(fh, int(col))
    raise ValueError(f"unknown data source {descriptor!r}")


def eval_bac(m: mlp.Mlp, test: Dataset) -> float:
    """Balanced accuracy in [0, 100]; a zero score counts wrong for both classes."""
    g = mlp.forward(m, test.patterns)
    pos = test.labels == 1
    neg = test.labels == -1
    if not pos.any() or not neg.any():
        raise ValueError("test set must contain both classes")
    tpr = float(np.mean(g[pos] > 0.0))
    tnr = float(np.mean(g[neg] < 0.0))
    return 100.0 * 0.5 * (tpr + tnr)


def eval_auc(m: mlp.Mlp, test: Dataset) -> float:
    """Pairwise ranking score in [0, 100]; ties credit one half."""
    g = mlp.forward(m, test.patterns)
    pos = test.labels == 1
    neg = test.labels == -1
    if not pos.any() or not neg.any():
        raise ValueError("test set must contain both classes")
    diff = g[pos][:, None] - g[neg][None, :]
    credit = np.where(diff > 0.0, 1.0, np.where(diff < 0.0, 0.0, 0.5))
    return 100.0 * float(credit.mean())


def _ber_objective(loss: Loss, model: mlp.Mlp, cp: np.ndarray, cn: np.ndarray) -> float:
    s_cp = mlp.forward(model, cp)
    s_cn = mlp.forward(model, cn)
    return 0.5 * (float(np.mean(loss.eval(s_cp))) + float(np.mean(loss.eval(-s_cn))))


def _auc_objective(
    loss: Loss, model: mlp.Mlp, cp: np.ndarray, cn: np.ndarray, ii, jj
) -> float:
    margins = mlp.forward(model, cp)[ii] - mlp.forward(model, cn)[jj]
    return float(np.mean(loss.eval(margins)))


def _ber_epoch(loss, model, state, acc, cp, cn, batch_size, rng):
    half = max(1, batch_size // 2)
    perm_cp = rng.permutation(len(cp))
    perm_cn = rng.permutation(len(cn))
    n_batches = max(1, min(len(cp), len(cn)) // half)
    names = model.parameter_names()
    for b in range(n_batches):
        icp = perm_cp[b * half : (b + 1) * half]
        icn = perm_cn[b * half : (b + 1) * half]
        x_cp, x_cn = cp[icp], cn[icn]
        acc.zero()
        u_cp = np.asarray(loss.deriv(mlp.forward(model, x_cp))) * (0.5 / len(icp))
        u_cn = -np.asarray(loss.deriv(-mlp.forward(model, x_cn))) * (0.5 / len(icn))
        mlp.backward_margin(model, x_cp, u_cp, acc)
        mlp.backward_margin(model, x_cn, u_cn, acc)
        amsgrad.step(state, model.parameters(), acc.gradients(), names=names)


def _auc_pairs(n_cp, n_cn, pair_budget, rng):
    total = n_cp * n_cn
    if total <= pair_budget:
        idx = rng.permutation(total)
        return idx // n_cn, idx % n_cn
    ii = rng.integers(0, n_cp, size=pair_budget)
    jj = rng.integers(0, n_cn, size=pair_budget)
    return ii, jj


def _auc_epoch(loss, model, state, acc, cp, cn, ii, jj, batch_size, rng):
    names = model.parameter_names()
    n_pairs = len(ii)
    for start in range(0, n_pairs, batch_size):
        bi = ii[start : start + batch_size]
        bj = jj[start : start + batch_size]
        x_i, x_j = cp[bi], cn[bj]
        margins = mlp.forward(model, x_i) - mlp.forward(model, x_j)
        u = np.asarray(loss.deriv(margins)) / len(bi)
        acc.zero()
        mlp.backward_margin(model, x_i, u, acc)
        mlp.backward_margin(model, x_j, -u, acc)
        amsgrad.step(state, model.parameters(), acc.gradients(), names=names)


def train(config: ExperimentConfig) -> tuple[mlp.Mlp, list[EpochRecord]]:
    """Run one experiment and return the final model with per-epoch records."""
    loss = parse_loss_descriptor(config.loss)
    if loss.deriv is None:
        raise ValueError(
            f"loss {loss.name!r} cannot be trained with (no gradient); "
            "use it for evaluation only"
        )
    ds = _load_source(config.data, config)
    test_fraction = config.n_test / len(ds)
    pool, test = split(
        ds, test_fraction, balanced_test=True, seed=_child_seed(config.seed, 2)
    )
    if config.standardize:
        pool, test = standardize(pool, test)
    cp, cn = corrupt(
        pool, config.noise, config.n_cp, config.n_cn, seed=_child_seed(config.seed, 3)
    )
    model = mlp.init_mlp(pool.dim, config.hidden, seed=_child_seed(config.seed, 4))
    acc = mlp.GradAccum.for_model(model)
    state = amsgrad.init_state(
        model.parameters(),
        lr=config.optimizer.lr,
        beta1=config.optimizer.beta1,
        beta2=config.optimizer.beta2,
        eps=config.optimizer.eps,
    )
    records: list[EpochRecord] = []
    for epoch in range(1, config.epochs + 1):
        rng = _seed_stream(config.seed, 5, epoch)
        if config.objective == "ber":
            _ber_epoch(loss, model, state, acc, cp, cn, config.batch_size, rng)
            objective = _ber_objective(loss, model, cp, cn)
        else:
            ii, jj = _auc_pairs(len(cp), len(cn), config.pair_budget, rng)
            _auc_epoch(loss, model, state, acc, cp, cn, ii, jj, config.batch_size, rng)
            objective = _auc_objective(loss, model, cp, cn, ii, jj)
        records.append(
            EpochRecord(
                epoch=epoch,
                train_objective=objective,
                test_bac=eval_bac(model, test),
                test_auc=eval_auc(model, test),
            )
        )
    return model, records

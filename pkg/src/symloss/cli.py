"""Command line entry point.

Subcommands:

  losses                     table of zoo losses and their properties
  check <loss>               calibration report for one loss, as JSON
  verify <suite> [--seed N]  run a verification sweep; exit 1 on defect
  counterexample             ranking counterexample table as CSV
  experiment <config.json>   run a loss x noise x seed grid, write CSVs
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .calibration import check_calibration, counterexample_table
from .losses import loss_descriptor, parse_loss_descriptor, zoo
from .risks import NoiseSpec
from .training import ExperimentConfig, OptimizerParams, train
from .verify import SUITES, run_suite

__all__ = ["main", "ConfigError", "load_experiment_config", "run_experiment"]


class ConfigError(ValueError):
    """Config schema violation; carries the JSON path of the offender."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _sym_tag(loss) -> str:
    if loss.symmetric:
        return "yes"
    if loss.symmetric_band is not None:
        return "band"
    return "no"


def cmd_losses(out) -> int:
    rows = [("loss", "convex", "symmetric", "recover_eta", "minimizer")]
    for loss in zoo():
        rows.append(
            (
                loss_descriptor(loss),
                "yes" if loss.convex else "no",
                _sym_tag(loss),
                "yes" if loss.recovers_eta else "no",
                loss.minimizer_formula,
            )
        )
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    for r in rows:
        print("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip(), file=out)
    return 0


def cmd_check(descriptor: str, out) -> int:
    loss = parse_loss_descriptor(descriptor)
    report = check_calibration(loss)
    print(json.dumps(dataclasses.asdict(report), indent=2), file=out)
    return 0


def cmd_verify(suite: str, seed: int, out) -> int:
    report = run_suite(suite, seed=seed)
    print(json.dumps(report, indent=2, default=float), file=out)
    return 0 if report["passed"] else 1


def cmd_counterexample(out) -> int:
    table = counterexample_table()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["pair", "eta_gap", *table.function_names])
    for k, (i, j) in enumerate(table.pair_rows):
        writer.writerow(
            [
                f"eta{i + 1}-eta{j + 1}",
                f"{table.eta_gaps[k]:g}",
                *(f"{v:g}" for v in table.pair_losses[k]),
            ]
        )
    writer.writerow(
        ["score", "", *(f"{table.scores[g]:g}" for g in table.function_names)]
    )
    return 0


# --- experiment grids -------------------------------------------------------


def _expect(obj: dict, key: str, types, path: str, default=None, required=False):
    if key not in obj:
        if required:
            raise ConfigError(f"{path}.{key}", "missing required key")
        return default
    value = obj[key]
    if not isinstance(value, types):
        raise ConfigError(
            f"{path}.{key}",
            f"expected {getattr(types, '__name__', types)}, got {type(value).__name__}",
        )
    return value


def load_experiment_config(obj: dict) -> dict:
    """Validate an experiment grid config, reporting offenders by JSON path."""
    if not isinstance(obj, dict):
        raise ConfigError("$", "config must be a JSON object")
    out = {}
    out["data"] = _expect(obj, "data", str, "$", default="gauss:2:4")
    out["objective"] = _expect(obj, "objective", str, "$", default="ber")
    if out["objective"] not in ("ber", "auc"):
        raise ConfigError("$.objective", f"must be 'ber' or 'auc', got {out['objective']!r}")

    losses = _expect(obj, "losses", list, "$", required=True)
    if not losses:
        raise ConfigError("$.losses", "must list at least one loss descriptor")
    for i, item in enumerate(losses):
        if not isinstance(item, str):
            raise ConfigError(f"$.losses[{i}]", "loss descriptor must be a string")
        try:
            parse_loss_descriptor(item)
        except ValueError as exc:
            raise ConfigError(f"$.losses[{i}]", str(exc)) from None
    out["losses"] = losses

    noises = _expect(obj, "noises", list, "$", default=[[1.0, 0.0]])
    parsed_noises = []
    for i, item in enumerate(noises):
        if not (isinstance(item, (list, tuple)) and len(item) == 2):
            raise ConfigError(f"$.noises[{i}]", "expected a [pi, pi_prime] pair")
        try:
            parsed_noises.append(NoiseSpec(float(item[0]), float(item[1])))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"$.noises[{i}]", str(exc)) from None
    out["noises"] = parsed_noises

    seeds = _expect(obj, "seeds", list, "$", default=[0])
    for i, s in enumerate(seeds):
        if not isinstance(s, int):
            raise ConfigError(f"$.seeds[{i}]", "seeds must be integers")
    out["seeds"] = seeds

    for key, default in (
        ("epochs", 50),
        ("batch_size", 500),
        ("hidden", 32),
        ("pair_budget", 250_000),
        ("n_cp", 500),
        ("n_cn", 500),
        ("n_test", 500),
    ):
        value = _expect(obj, key, int, "$", default=default)
        if value < (0 if key == "hidden" else 1):
            raise ConfigError(f"$.{key}", f"must be positive, got {value}")
        out[key] = value
    out["standardize"] = _expect(obj, "standardize", bool, "$", default=True)

    opt = _expect(obj, "optimizer", dict, "$", default={})
    kwargs = {}
    for key in ("lr", "beta1", "beta2", "eps"):
        if key in opt:
            if not isinstance(opt[key], (int, float)):
                raise ConfigError(f"$.optimizer.{key}", "expected a number")
            kwargs[key] = float(opt[key])
    unknown = set(opt) - {"lr", "beta1", "beta2", "eps"}
    if unknown:
        raise ConfigError(f"$.optimizer.{sorted(unknown)[0]}", "unknown optimizer key")
    out["optimizer"] = OptimizerParams(**kwargs)
    return out


def config_hash(obj: dict) -> str:
    canonical = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _cell_config(grid: dict, loss: str, noise: NoiseSpec, seed: int) -> ExperimentConfig:
    return ExperimentConfig(
        loss=loss,
        noise=noise,
        objective=grid["objective"],
        hidden=grid["hidden"],
        optimizer=grid["optimizer"],
        epochs=grid["epochs"],
        batch_size=grid["batch_size"],
        pair_budget=grid["pair_budget"],
        seed=seed,
        data=grid["data"],
        n_cp=grid["n_cp"],
        n_cn=grid["n_cn"],
        n_test=grid["n_test"],
        standardize=grid["standardize"],
    )


def _run_cell(config: ExperimentConfig):
    _, records = train(config)
    final = records[-1]
    row = {
        "dataset": config.data,
        "loss": config.loss,
        "pi": config.noise.pi,
        "pi_prime": config.noise.pi_prime,
        "objective": config.objective,
        "seed": config.seed,
        "bac": final.test_bac,
        "auc": final.test_auc,
    }
    curves = [
        {
            "loss": config.loss,
            "pi": config.noise.pi,
            "pi_prime": config.noise.pi_prime,
            "seed": config.seed,
            "epoch": r.epoch,
            "train_objective": r.train_objective,
            "test_bac": r.test_bac,
            "test_auc": r.test_auc,
        }
        for r in records
    ]
    return row, curves


RESULT_COLUMNS = ("dataset", "loss", "pi", "pi_prime", "objective", "seed", "bac", "auc")


def aggregate_rows(rows: list[dict]) -> list[dict]:
    """Mean and standard error of both metrics per (loss, noise) cell."""
    cells: dict[tuple, list[dict]] = {}
    order = []
    for row in rows:
        key = (row["loss"], row["pi"], row["pi_prime"])
        if key not in cells:
            cells[key] = []
            order.append(key)
        cells[key].append(row)
    out = []
    for key in order:
        group = cells[key]
        agg = {"loss": key[0], "pi": key[1], "pi_prime": key[2], "n": len(group)}
        for metric in ("bac", "auc"):
            vals = np.array([g[metric] for g in group], dtype=float)
            agg[f"{metric}_mean"] = float(vals.mean())
            agg[f"{metric}_stderr"] = (
                float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
            )
        out.append(agg)
    return out


def _ttest_marks(rows: list[dict], metric: str) -> dict[tuple, bool]:
    """Mark cells not significantly below the per-noise best (paired, one sided)."""
    from scipy import stats

    by_noise: dict[tuple, dict[str, dict[int, float]]] = {}
    for row in rows:
        noise = (row["pi"], row["pi_prime"])
        by_noise.setdefault(noise, {}).setdefault(row["loss"], {})[row["seed"]] = row[
            metric
        ]
    marks = {}
    for noise, per_loss in by_noise.items():
        means = {l: np.mean(list(v.values())) for l, v in per_loss.items()}
        best = max(means, key=means.get)
        for l, vals in per_loss.items():
            if l == best:
                marks[(l, *noise)] = True
                continue
            shared = sorted(set(vals) & set(per_loss[best]))
            if len(shared) < 2:
                marks[(l, *noise)] = means[l] >= means[best]
                continue
            a = [per_loss[best][s] for s in shared]
            b = [vals[s] for s in shared]
            res = stats.ttest_rel(a, b, alternative="greater")
            marks[(l, *noise)] = bool(res.pvalue >= 0.05)
    return marks


def run_experiment(grid: dict, out_dir: str, jobs: int = 1, ttest: bool = False) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    cells = [
        _cell_config(grid, loss, noise, seed)
        for loss in grid["losses"]
        for noise in grid["noises"]
        for seed in grid["seeds"]
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, cells))
    else:
        results = [_run_cell(c) for c in cells]

    results_path = os.path.join(out_dir, "results.csv")
    with open(results_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for row, _ in results:
            writer.writerow(
                [
                    row["dataset"],
                    row["loss"],
                    f"{row['pi']:g}",
                    f"{row['pi_prime']:g}",
                    row["objective"],
                    row["seed"],
                    f"{row['bac']:.6f}",
                    f"{row['auc']:.6f}",
                ]
            )

    curves_path = os.path.join(out_dir, "curves.jsonl")
    with open(curves_path, "w", encoding="utf-8") as fh:
        for _, curves in results:
            for rec in curves:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")

    rows = [row for row, _ in results]
    agg = aggregate_rows(rows)
    agg_path = os.path.join(out_dir, "aggregate.csv")
    with open(agg_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["loss", "pi", "pi_prime", "n", "bac_mean", "bac_stderr", "auc_mean", "auc_stderr"]
        )
        for a in agg:
            writer.writerow(
                [
                    a["loss"],
                    f"{a['pi']:g}",
                    f"{a['pi_prime']:g}",
                    a["n"],
                    f"{a['bac_mean']:.6f}",
                    f"{a['bac_stderr']:.6f}",
                    f"{a['auc_mean']:.6f}",
                    f"{a['auc_stderr']:.6f}",
                ]
            )

    manifest = {
        "config_hash": config_hash(_jsonable_grid(grid)),
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "seeds": grid["seeds"],
        "outputs": {
            "results": results_path,
            "curves": curves_path,
            "aggregate": agg_path,
        },
    }
    if ttest:
        manifest["co_best"] = {
            metric: {
                f"{l}@{pi:g},{pp:g}": ok
                for (l, pi, pp), ok in _ttest_marks(rows, metric).items()
            }
            for metric in ("bac", "auc")
        }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return manifest


def _jsonable_grid(grid: dict) -> dict:
    obj = dict(grid)
    obj["noises"] = [[n.pi, n.pi_prime] for n in grid["noises"]]
    obj["optimizer"] = dataclasses.asdict(grid["optimizer"])
    return obj


def cmd_experiment(config_path: str, out_dir: str, jobs: int, ttest: bool, out) -> int:
    with open(config_path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            print(f"error: {config_path} is not valid JSON: {exc}", file=sys.stderr)
            return 2
    try:
        grid = load_experiment_config(raw)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    manifest = run_experiment(grid, out_dir, jobs=jobs, ttest=ttest)
    print(json.dumps(manifest, indent=2, sort_keys=True), file=out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symloss",
        description="Symmetric-loss toolkit: loss zoo, risk identities, experiments.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("losses", help="list zoo losses and their properties")

    p_check = sub.add_parser("check", help="calibration report for one loss")
    p_check.add_argument("loss", help="loss descriptor, e.g. barrier(b=200,r=50)")

    p_verify = sub.add_parser("verify", help="run a verification sweep")
    p_verify.add_argument("suite", choices=sorted(SUITES))
    p_verify.add_argument("--seed", type=int, default=0)

    sub.add_parser("counterexample", help="ranking counterexample table as CSV")

    p_exp = sub.add_parser("experiment", help="run a loss x noise x seed grid")
    p_exp.add_argument("config", help="path to a JSON grid config")
    p_exp.add_argument("--out", default="runs", help="output directory")
    p_exp.add_argument(
        "--jobs",
        type=int,
        default=int(os.environ.get("SYMLOSS_JOBS", "1")),
        help="parallel grid cells (default: SYMLOSS_JOBS or 1)",
    )
    p_exp.add_argument(
        "--ttest",
        action="store_true",
        help="mark per-noise co-best losses with a one-sided paired t-test",
    )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    out = sys.stdout
    try:
        if args.command == "losses":
            return cmd_losses(out)
        if args.command == "check":
            return cmd_check(args.loss, out)
        if args.command == "verify":
            return cmd_verify(args.suite, args.seed, out)
        if args.command == "counterexample":
            return cmd_counterexample(out)
        if args.command == "experiment":
            return cmd_experiment(args.config, args.out, args.jobs, args.ttest, out)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


if __name__ == "__main__":
    raise SystemExit(main())

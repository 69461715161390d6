"""Command line entry point.

Subcommands::

    dessca run        training campaigns, per-repetition CSV records and a JSON summary
    dessca sample     online space-filling design, one CSV row per point as it is found
    dessca density    coverage density grid of 2-D points as CSV
    dessca summarize  compare a baseline and a candidate summary JSON
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np
import yaml

from dessca import envs
from dessca.doe import FIG2_POINTS, density_grid, sample_points
from dessca.engine import DesscaEngine
from dessca.harness import (
    STRATEGIES, TABLE_I, ExperimentConfig, derive_seeds, read_summary_json,
    relative_median_improvement, run_campaign, significant, summarize, write_record_csv,
    write_summary_json,
)
from dessca.policies import make_policy
from dessca.pso import SwarmConfig
from dessca.reference import DegenerateFeasibleSet, uniform_box, uniform_feasible
from dessca.state_space import denormalize

log = logging.getLogger("dessca")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# --- config -------------------------------------------------------------------

def _coerce(name: str, raw):
    """Convert a raw override (string from the command line or YAML scalar)."""
    if isinstance(raw, str):
        raw = yaml.safe_load(raw) if raw.strip() else None
    if name in ("env", "strategy", "policy"):
        return str(raw)
    if raw is None:
        return None
    if name in ("bandwidth", "c1", "c2", "w", "gamma"):
        return float(raw)
    return int(raw)


def build_config(config_path: str | None, overrides: dict) -> ExperimentConfig:
    """Merge per-environment defaults, the config file and command-line overrides."""
    valid = ExperimentConfig.keys()
    values = {}
    if config_path:
        try:
            loaded = yaml.safe_load(Path(config_path).read_text()) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise UsageError(f"cannot read config {config_path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise UsageError("config file must be a flat mapping of key: value")
        values.update(loaded)
    values.update(overrides)
    unknown = sorted(set(values) - set(valid))
    if unknown:
        raise UsageError(f"unknown config keys {unknown}; valid keys are: {', '.join(valid)}")
    env = values.get("env", "mountain_car")
    if env not in TABLE_I:
        raise UsageError(f"unknown environment {env!r}; choose from {sorted(TABLE_I)}")
    try:
        typed = {k: _coerce(k, v) for k, v in values.items()}
        cfg = ExperimentConfig.for_env(env, **{k: v for k, v in typed.items() if k != "env"})
        if cfg.strategy != "both":
            cfg.validate()
        else:
            replace(cfg, strategy="es").validate()
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid config: {exc}") from exc
    if cfg.repetitions < 2:
        raise UsageError("repetitions must be >= 2 to summarize a run")
    return cfg


def _parse_sets(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"override {item!r} is not of the form key=value")
        key, value = item.split("=", 1)
        out[key.strip()] = value
    return out


# --- run ----------------------------------------------------------------------

def _one_repetition(args):
    cfg, rep, path = args
    env = cfg.make_env()
    policy = make_policy(cfg.policy, env, derive_seeds(cfg.seed, rep)["policy"])
    record = run_campaign(cfg, policy, rep)
    write_record_csv(record, path)
    return record.normalized_return()


def cmd_run(ns) -> int:
    overrides = _parse_sets(ns.set)
    for key in ("env", "strategy", "repetitions", "seed"):
        if getattr(ns, key) is not None:
            overrides[key] = getattr(ns, key)
    cfg = build_config(ns.config, overrides)
    strategies = STRATEGIES if cfg.strategy == "both" else (cfg.strategy,)
    out = Path(ns.out)
    out.mkdir(parents=True, exist_ok=True)
    for strategy in strategies:
        scfg = replace(cfg, strategy=strategy)
        stem = f"{scfg.env}_{strategy}"
        jobs = [(scfg, rep, out / f"{stem}_rep{rep:03d}.csv") for rep in range(scfg.repetitions)]
        if ns.jobs > 1:
            with ProcessPoolExecutor(ns.jobs) as pool:
                returns = list(pool.map(_one_repetition, jobs))
        else:
            returns = [_one_repetition(j) for j in jobs]
        summary = summarize(returns)
        write_summary_json(summary, out / f"{stem}_summary.json")
        print(f"{stem}: median {summary.median:.6g}  iqr {summary.iqr:.6g}  mean {summary.mean:.6g}  "
              f"95% CI [{summary.ci_low:.6g}, {summary.ci_high:.6g}]  n={summary.n}")
    return EXIT_OK


# --- sample -------------------------------------------------------------------

def parse_reference(spec: str, d: int, seed: int):
    """``uniform``, ``ball:R`` (Euclidean ball in normalized space) or ``env:NAME``."""
    kind, _, arg = spec.partition(":")
    if kind == "uniform":
        return uniform_box(d)
    if kind == "ball":
        radius = float(arg)
        return uniform_feasible(d, lambda x: np.linalg.norm(x, axis=1) <= radius, seed=seed)
    if kind == "env":
        env = envs.make(arg)
        if env.dim != d:
            raise UsageError(f"environment {arg} has dimension {env.dim}, not {d}")
        return uniform_feasible(d, lambda x: env.feasible_init(denormalize(x, env.bounds)), seed=seed)
    raise UsageError(f"unknown reference {spec!r}; use uniform, ball:R or env:NAME")


def cmd_sample(ns) -> int:
    if ns.dim < 1 or ns.n < 1:
        raise UsageError("--dim and --n must be >= 1")
    try:
        reference = parse_reference(ns.reference, ns.dim, ns.seed)
    except DegenerateFeasibleSet as exc:
        raise UsageError(str(exc)) from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    engine = DesscaEngine(reference, bandwidth=ns.bandwidth, swarm=SwarmConfig(seed=ns.seed))
    fh = open(ns.out, "w", newline="") if ns.out else sys.stdout
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"x{i + 1}" for i in range(ns.dim)])
        fh.flush()
        for x in sample_points(engine, ns.n):
            writer.writerow([repr(float(v)) for v in x])
            fh.flush()
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


# --- density ------------------------------------------------------------------

def _read_points(path: str) -> np.ndarray:
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except OSError as exc:
        raise UsageError(f"cannot read points file: {exc}") from exc
    try:
        float(rows[0][0])
    except (ValueError, IndexError):
        rows = rows[1:]
    try:
        pts = np.array([[float(v) for v in r] for r in rows])
    except ValueError as exc:
        raise UsageError(f"malformed points file: {exc}") from exc
    if pts.ndim != 2 or len(pts) == 0:
        raise UsageError("points file holds no points")
    return pts


def cmd_density(ns) -> int:
    pts = _read_points(ns.points) if ns.points else FIG2_POINTS
    if pts.shape[1] != 2:
        raise UsageError(f"density grids need 2-D points, got dimension {pts.shape[1]}")
    if not ns.bandwidth > 0 or ns.resolution < 2:
        raise UsageError("--bandwidth must be positive and --resolution >= 2")
    xs, ys, z = density_grid(pts, ns.bandwidth, ns.resolution)
    fh = open(ns.out, "w", newline="") if ns.out else sys.stdout
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x1", "x2", "density"])
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                writer.writerow([repr(float(x)), repr(float(y)), repr(float(z[i, j]))])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


# --- summarize ----------------------------------------------------------------

def format_comparison(base, cand, labels=("ES", "DESSCA")) -> str:
    pct = lambda v: f"{100.0 * v:.3f} %"
    rows = [
        ("", labels[0], labels[1]),
        ("median performance", pct(base.median), pct(cand.median)),
        ("relative median improvement", f"{relative_median_improvement(base, cand):+.3f} %", ""),
        ("interquartile range", pct(base.iqr), pct(cand.iqr)),
        ("sample mean", pct(base.mean), pct(cand.mean)),
        ("95 % confidence interval of the mean",
         f"[{pct(base.ci_low)}, {pct(base.ci_high)}]", f"[{pct(cand.ci_low)}, {pct(cand.ci_high)}]"),
        ("significant", "yes" if significant(base, cand) else "no", ""),
    ]
    w0 = max(len(r[0]) for r in rows)
    w1 = max(len(r[1]) for r in rows)
    return "\n".join(f"{a:<{w0}}  {b:>{w1}}  {c}".rstrip() for a, b, c in rows)


def cmd_summarize(ns) -> int:
    try:
        base = read_summary_json(ns.baseline)
        cand = read_summary_json(ns.candidate)
    except (OSError, json.JSONDecodeError, ValueError, TypeError) as exc:
        raise UsageError(f"malformed summary: {exc}") from exc
    print(format_comparison(base, cand, (ns.baseline_label, ns.candidate_label)))
    return EXIT_OK


# --- entry --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dessca", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run training campaigns")
    run.add_argument("--config", help="flat YAML file of experiment keys")
    run.add_argument("--env", choices=sorted(TABLE_I))
    run.add_argument("--strategy", choices=[*STRATEGIES, "both"])
    run.add_argument("--repetitions", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    run.add_argument("--out", default="results")
    run.add_argument("--jobs", type=int, default=1, help="parallel repetitions")
    run.set_defaults(func=cmd_run)

    smp = sub.add_parser("sample", help="online space-filling design in [-1, 1]^d")
    smp.add_argument("--dim", type=int, required=True)
    smp.add_argument("--n", type=int, required=True)
    smp.add_argument("--reference", default="uniform", help="uniform | ball:R | env:NAME")
    smp.add_argument("--bandwidth", type=float, default=0.1)
    smp.add_argument("--seed", type=int, default=0)
    smp.add_argument("--out")
    smp.set_defaults(func=cmd_sample)

    den = sub.add_parser("density", help="coverage density grid of 2-D points")
    den.add_argument("--points", help="CSV of x1,x2 rows (default: built-in five-point sample)")
    den.add_argument("--bandwidth", type=float, default=0.1)
    den.add_argument("--resolution", type=int, default=101)
    den.add_argument("--out")
    den.set_defaults(func=cmd_density)

    sm = sub.add_parser("summarize", help="compare two summary JSON files")
    sm.add_argument("baseline")
    sm.add_argument("candidate")
    sm.add_argument("--baseline-label", default="ES")
    sm.add_argument("--candidate-label", default="DESSCA")
    sm.set_defaults(func=cmd_summarize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return ns.func(ns)
    except UsageError as exc:
        print(f"dessca {ns.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # runtime failure
        log.debug("runtime failure", exc_info=True)
        print(f"dessca {ns.command}: failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

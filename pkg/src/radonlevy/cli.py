"""Command-line experiment runner.

    radonlevy verify --config configs/default.yaml --seed 7 --out runs/a

Commands: ``simulate``, ``radonify``, ``verify``, ``convergence``, ``cf-check``.
Numeric outputs depend only on the config and seed; wall-clock data goes to
``run_metadata.json`` alone.  The exit status is 0 iff every enabled check
passed, 2 for configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import platform
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import stats
from .config import ConfigError, ExperimentConfig, load_config
from .cylindrical import ModelKind, simulate_bundle
from .radonify import (
    bare_series_norm,
    cauchy_probes,
    martingale_gap_bound,
    radonify_ensemble,
    radonify_series,
    write_probe_reports,
)
from .stats import FiniteDimensionalProjection, TestReport

log = logging.getLogger("radonlevy")

COMMANDS = ("simulate", "radonify", "verify", "convergence", "cf-check")


def _extra(cfg: ExperimentConfig, command: str) -> dict:
    return {"config_hash": cfg.config_hash, "command": command}


def _write_metadata(cfg: ExperimentConfig, command: str, argv, status: int) -> None:
    meta = {
        "command": command,
        "argv": list(argv),
        "finished_utc": datetime.now(timezone.utc).isoformat(),
        "config_hash": cfg.config_hash,
        "seed": cfg.seed,
        "exit_status": status,
        "radonlevy": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
    }
    (cfg.output_dir / "run_metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _simulate(cfg: ExperimentConfig) -> int:
    out = cfg.output_dir / "bundles"
    out.mkdir(parents=True, exist_ok=True)
    for r in range(cfg.export):
        simulate_bundle(cfg.model, cfg.grid, cfg.K, cfg.seed, r).to_csv(out / f"bundle_{r:05d}.csv")
    return 0


def _radonify(cfg: ExperimentConfig) -> int:
    out = cfg.output_dir / "paths"
    out.mkdir(parents=True, exist_ok=True)
    for r in range(cfg.export):
        bundle = simulate_bundle(cfg.model, cfg.grid, cfg.K, cfg.seed, r)
        radonify_series(bundle, cfg.operator, cfg.n).to_csv(out / f"path_{r:05d}.csv")
    return 0


def _projection(cfg: ExperimentConfig, params: dict, default) -> FiniteDimensionalProjection:
    return FiniteDimensionalProjection([cfg.direction(d) for d in params.get("directions", default)])


def _verify(cfg: ExperimentConfig) -> int:
    T = cfg.grid.T
    tests = cfg.tests
    vd = tests.get("version_defect")
    keep = int(vd.get("replications", 10)) if vd is not None else 0
    paths, bundles = [], []
    for r in range(cfg.replications):
        bundle = simulate_bundle(cfg.model, cfg.grid, cfg.K, cfg.seed, r)
        paths.append(radonify_series(bundle, cfg.operator, cfg.n))
        if r < keep:
            bundles.append(bundle)
    log.info("simulated %d replications", len(paths))

    reports: list[TestReport] = []
    if "zero_start" in tests:
        reports.append(stats.test_zero_start(paths, seed=cfg.seed))
    if "stationarity" in tests:
        p = tests["stationarity"]
        reports.append(
            stats.test_stationary_increments(
                paths,
                s=p.get("s", 0.0),
                t=p.get("t", T / 2),
                dt=p.get("dt", T / 4),
                proj=_projection(cfg, p, [0, 1]),
                alpha=p.get("alpha", 0.01),
                seed=cfg.seed,
            )
        )
    if "independence" in tests:
        p = tests["independence"]
        reports.append(
            stats.test_independent_increments(
                paths,
                intervals=p.get("intervals", [(0.0, T / 4), (T / 2, 3 * T / 4)]),
                proj=_projection(cfg, p, [0]),
                u_grid=p.get("u_grid", np.linspace(-3, 3, 7)),
                tolerance_factor=p.get("tolerance_factor", 4.0),
                seed=cfg.seed,
            )
        )
    if "stochastic_continuity" in tests:
        p = tests["stochastic_continuity"]
        reports.append(
            stats.test_stochastic_continuity(
                paths,
                s=p.get("s", T / 2),
                epsilons=p.get("epsilons", [0.5]),
                floor=p.get("floor", 0.1),
                dt_max=p.get("dt_max"),
                levels=p.get("levels"),
                seed=cfg.seed,
            )
        )
    if vd is not None:
        rng = np.random.default_rng([cfg.seed, 0xD1])
        G = cfg.operator.codomain
        directions = [G.random(rng) for _ in range(int(vd.get("directions", 8)))]
        reports.append(
            stats.test_version_identity(
                paths[:keep], bundles, cfg.operator, directions, vd.get("tolerance", 1e-10), seed=cfg.seed
            )
        )

    stats.write_reports_jsonl(reports, cfg.output_dir / "verify_reports.jsonl", _extra(cfg, "verify"), append=False)
    stats.write_summary_csv(reports, cfg.output_dir / "summary.csv")
    for r in reports:
        log.info("%-24s statistic=%.6g passed=%s", r.name, r.statistic, r.passed)
    return 0 if all(r.passed for r in reports) else 1


def _convergence(cfg: ExperimentConfig) -> int:
    conv = cfg.convergence
    epsilons = conv.get("epsilons", [0.1])
    t = conv.get("t", cfg.grid.T)
    bare_n = conv.get("bare_n", [])
    bundles = [simulate_bundle(cfg.model, cfg.grid, cfg.K, cfg.seed, r) for r in range(cfg.replications)]
    pairs = cfg.probe_pairs or [(0, cfg.n)]
    probes = cauchy_probes(bundles, cfg.operator, pairs, epsilons)
    write_probe_reports(probes, cfg.output_dir / "cauchy_probes.jsonl", {"seed": cfg.seed, **_extra(cfg, "convergence")})

    with (cfg.output_dir / "bare_series_contrast.csv").open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "mean_bare_sq", "mean_radonified_sq", "t", "seed", "config_hash"])
        S = cfg.operator
        for n in bare_n:
            bare = np.mean([bare_series_norm(b, n, t) ** 2 for b in bundles])
            n_radon = min(n, S.rank)
            radon = np.mean([np.sum(radonify_series(b, S, n_radon).value_at(t) ** 2) for b in bundles])
            writer.writerow([n, repr(float(bare)), repr(float(radon)), repr(float(t)), cfg.seed, cfg.config_hash])

    reports = []
    for eps in epsilons:
        series = [p for p in probes if p.epsilon == eps]
        # excess of each step over the two-standard-error allowance; <= 0 means monotone
        excess = max(
            (
                b.empirical_prob - a.empirical_prob - 2 * math.hypot(a.std_error, b.std_error)
                for a, b in zip(series, series[1:])
            ),
            default=0.0,
        )
        reports.append(
            TestReport("cauchy_monotone", excess, None, 0.0, excess <= 0.0, cfg.replications, cfg.seed, {"epsilon": eps})
        )
    if cfg.model.kind is ModelKind.WIENER:
        within = [p.empirical_prob <= martingale_gap_bound(p.tail_sq, cfg.grid.T, p.epsilon) for p in probes]
        frac = sum(within) / len(within)
        reports.append(TestReport("cauchy_martingale_bound", frac, None, 0.95, frac >= 0.95, cfg.replications, cfg.seed))
    stats.write_reports_jsonl(reports, cfg.output_dir / "convergence_reports.jsonl", _extra(cfg, "convergence"), append=False)
    return 0 if all(r.passed for r in reports) else 1


def _cf_check(cfg: ExperimentConfig) -> int:
    p = cfg.cf_check
    t = p.get("t", cfg.grid.T)
    paths = radonify_ensemble(cfg.model, cfg.operator, cfg.grid, cfg.replications, cfg.seed)
    reports = [
        stats.cf_match(
            cfg.model,
            cfg.operator,
            cfg.direction(d),
            t,
            p["u_grid"],
            cfg.replications,
            cfg.seed,
            paths=paths,
            tolerance_factor=p.get("tolerance_factor", 4.0),
        )
        for d in p.get("directions", [0])
    ]
    stats.write_reports_jsonl(reports, cfg.output_dir / "cf_reports.jsonl", _extra(cfg, "cf-check"), append=False)
    return 0 if all(r.passed for r in reports) else 1


_RUNNERS = {
    "simulate": _simulate,
    "radonify": _radonify,
    "verify": _verify,
    "convergence": _convergence,
    "cf-check": _cf_check,
}


def run(cfg: ExperimentConfig, command: str, argv=()) -> int:
    """Run one command on a validated config and return the exit status."""
    if command not in _RUNNERS:
        raise ValueError(f"unknown command {command!r}; choose from {COMMANDS}")
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    status = _RUNNERS[command](cfg)
    _write_metadata(cfg, command, argv, status)
    return status


def _add_global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", type=Path, default=default, help="YAML experiment config (default: packaged)")
    parser.add_argument("--seed", type=int, default=default, help="override the config seed (u64)")
    parser.add_argument("--out", type=Path, default=default, help="override output_dir")
    parser.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS if suppress else False)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radonlevy", description=__doc__.splitlines()[0])
    _add_global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        _add_global_flags(sub.add_parser(name), suppress=True)
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, seed=args.seed, output_dir=args.out)
    except ConfigError as exc:
        for line in exc.errors:
            print(f"config error: {line}", file=sys.stderr)
        return 2
    return run(cfg, args.command, argv)


if __name__ == "__main__":
    sys.exit(main())

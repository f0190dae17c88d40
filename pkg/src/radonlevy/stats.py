"""Monte Carlo checks of the Levy properties of radonified paths.

Each check returns a :class:`TestReport`.  Tests with a p-value pass when
``p_value >= threshold``; defect-style checks pass when
``statistic <= threshold``.  Everything is a deterministic function of the
input paths, so reports reproduce exactly for a fixed seed.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import kstwobign

from .cylindrical import CoordinateLevyModel, CylindricalPathBundle, TimeGrid, closed_form_cf
from .hilbert import CoordinateVector, HilbertSchmidtOp
from .radonify import VectorPath, radonify_ensemble, version_defect

__all__ = [
    "TestReport",
    "FiniteDimensionalProjection",
    "empirical_cf",
    "ks_two_sample",
    "values_at",
    "increments",
    "test_zero_start",
    "test_stationary_increments",
    "independence_statistic",
    "test_independent_increments",
    "exceedance_probability",
    "dyadic_ladder",
    "test_stochastic_continuity",
    "test_version_identity",
    "cf_match",
    "write_reports_jsonl",
    "write_summary_csv",
]


@dataclass(frozen=True)
class TestReport:
    __test__ = False

    name: str
    statistic: float
    p_value: float | None
    threshold: float
    passed: bool
    sample_size: int
    seed: int | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class FiniteDimensionalProjection:
    """Directions ``g_1 .. g_n`` in G; maps ``y`` to ``(<y, g_1>, ..., <y, g_n>)``."""

    directions: tuple[CoordinateVector, ...]

    def __post_init__(self):
        directions = tuple(self.directions)
        if not directions:
            raise ValueError("a projection needs at least one direction")
        spaces = {d.space for d in directions}
        if len(spaces) != 1:
            raise ValueError("all directions must live in the same space")
        object.__setattr__(self, "directions", directions)

    @property
    def matrix(self) -> np.ndarray:
        return np.stack([d.coords for d in self.directions])

    def __len__(self) -> int:
        return len(self.directions)

    def __call__(self, values: np.ndarray) -> np.ndarray:
        """Project rows of ``values`` (shape (R, K_G)) to shape (R, n)."""
        return np.asarray(values) @ self.matrix.T


def empirical_cf(samples, u):
    """``mean(exp(i u x))`` over the samples; ``u`` may be an array."""
    x = np.asarray(samples, dtype=float).reshape(-1)
    if x.size == 0:
        raise ValueError("empirical characteristic function needs at least one sample")
    u = np.asarray(u, dtype=float)
    out = np.exp(1j * np.multiply.outer(u, x)).mean(axis=-1)
    return complex(out) if out.ndim == 0 else out


def ks_two_sample(a, b, alpha: float = 0.05, name: str = "ks_two_sample", seed=None) -> TestReport:
    """Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov p-value."""
    a = np.sort(np.asarray(a, dtype=float).reshape(-1))
    b = np.sort(np.asarray(b, dtype=float).reshape(-1))
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / a.size
    cdf_b = np.searchsorted(b, pooled, side="right") / b.size
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    en = a.size * b.size / (a.size + b.size)
    p = float(min(1.0, kstwobign.sf(d * math.sqrt(en)))) if d > 0 else 1.0
    return TestReport(name, d, p, alpha, p >= alpha, int(a.size + b.size), seed)


def values_at(paths: Sequence[VectorPath], t: float) -> np.ndarray:
    """Stack ``Y_t`` over replications into shape (R, K_G)."""
    return np.stack([p.value_at(t) for p in paths])


def increments(paths: Sequence[VectorPath], a: float, b: float) -> np.ndarray:
    return values_at(paths, b) - values_at(paths, a)


def _horizon(paths: Sequence[VectorPath]) -> float:
    if len(paths) == 0:
        raise ValueError("need at least one path")
    return paths[0].grid.T


def _seed_of(paths) -> int | None:
    return getattr(paths, "seed", None)


def test_zero_start(paths: Sequence[VectorPath], seed=None) -> TestReport:
    """Fraction of replications with ``Y_0 != 0``; must be exactly zero."""
    nonzero = sum(bool(np.any(p.values[0] != 0.0)) for p in paths)
    frac = nonzero / len(paths)
    return TestReport("zero_start", frac, None, 0.0, frac == 0.0, len(paths), seed)


def test_stationary_increments(
    paths: Sequence[VectorPath],
    s: float,
    t: float,
    dt: float,
    proj: FiniteDimensionalProjection,
    alpha: float = 0.01,
    min_replications: int = 100,
    seed=None,
) -> TestReport:
    """KS-compare increments over ``[s, s+dt]`` and ``[t, t+dt]`` along each direction.

    The directional p-values are Bonferroni-combined: the family passes when
    ``min(1, n * min p) >= alpha``.
    """
    T = _horizon(paths)
    if s < 0 or t < 0 or dt < 0 or max(s, t) + dt > T * (1 + 1e-12):
        raise ValueError(f"increment windows [{s}, {s + dt}] and [{t}, {t + dt}] must lie in [0, {T}]")
    if len(paths) < min_replications:
        raise ValueError(f"need at least {min_replications} replications, got {len(paths)}")
    first = proj(increments(paths, s, s + dt))
    second = proj(increments(paths, t, t + dt))
    reports = [ks_two_sample(first[:, j], second[:, j]) for j in range(len(proj))]
    p_min = min(r.p_value for r in reports)
    p_family = min(1.0, len(proj) * p_min)
    return TestReport(
        "stationary_increments",
        max(r.statistic for r in reports),
        p_family,
        alpha,
        p_family >= alpha,
        len(paths),
        seed,
        {"s": s, "t": t, "dt": dt, "directional_p": [r.p_value for r in reports]},
    )


test_stationary_increments.__test__ = False
test_zero_start.__test__ = False


def independence_statistic(a, b, u_grid) -> float:
    """``max_{u,v} |phi_AB(u,v) - phi_A(u) phi_B(v)|`` for paired samples ``a``, ``b``."""
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.size != b.size or a.size == 0:
        raise ValueError("paired samples must be non-empty and of equal size")
    u = np.asarray(u_grid, dtype=float).reshape(-1)
    ea = np.exp(1j * np.multiply.outer(u, a))  # (U, R)
    eb = np.exp(1j * np.multiply.outer(u, b))
    joint = ea @ eb.T / a.size  # (U, U)
    product = np.outer(ea.mean(axis=1), eb.mean(axis=1))
    return float(np.max(np.abs(joint - product)))


def test_independent_increments(
    paths: Sequence[VectorPath],
    intervals: Sequence[tuple[float, float]],
    proj: FiniteDimensionalProjection,
    u_grid,
    tolerance_factor: float = 4.0,
    seed=None,
) -> TestReport:
    """Characteristic-function factorization over every pair of disjoint intervals.

    Only the chosen directions and frequencies are examined, so this is a test
    of independence of the cylinder projections, not of the full sigma-algebras.
    """
    intervals = [(float(a), float(b)) for a, b in intervals]
    if len(intervals) < 2:
        raise ValueError("need at least two intervals")
    for a, b in intervals:
        if not a < b:
            raise ValueError(f"interval ({a}, {b}) is empty or reversed")
    ordered = sorted(intervals)
    for (a0, b0), (a1, b1) in zip(ordered, ordered[1:]):
        if a1 < b0:
            raise ValueError(f"intervals ({a0}, {b0}) and ({a1}, {b1}) overlap")
    T = _horizon(paths)
    if ordered[-1][1] > T * (1 + 1e-12) or ordered[0][0] < 0:
        raise ValueError(f"intervals must lie in [0, {T}]")

    projected = [proj(increments(paths, a, b)) for a, b in intervals]
    stat = 0.0
    for i in range(len(intervals)):
        for j in range(i + 1, len(intervals)):
            for d in range(len(proj)):
                stat = max(stat, independence_statistic(projected[i][:, d], projected[j][:, d], u_grid))
    tol = tolerance_factor / math.sqrt(len(paths))
    return TestReport(
        "independent_increments", stat, None, tol, stat < tol, len(paths), seed, {"intervals": intervals}
    )


test_independent_increments.__test__ = False


def exceedance_probability(paths: Sequence[VectorPath], s: float, dt: float, epsilon: float) -> float:
    """Fraction of replications with ``||Y_{s+dt} - Y_s|| > epsilon``."""
    if dt == 0:
        return 0.0
    inc = increments(paths, s, s + dt)
    return float(np.mean(np.sqrt(np.sum(inc**2, axis=1)) > epsilon))


def dyadic_ladder(grid: TimeGrid, s: float, dt_max: float | None = None, levels: int | None = None) -> list[float]:
    """Step sizes ``dt_max / 2**j``, all landing on the base grid, largest first."""
    res = grid.resolution
    dt_max = grid.T - s if dt_max is None else dt_max
    if levels is None:
        levels = int(math.floor(math.log2(dt_max / res) + 1e-9)) + 1 if dt_max >= res else 0
    ladder = [dt_max / 2**j for j in range(levels)]
    for dt in ladder:
        for point in (s, s + dt):
            if dt < res * (1 - 1e-9) or abs(point / res - round(point / res)) > 1e-6:
                raise ValueError(
                    f"ladder step {dt} at s={s} falls between grid points of resolution {res}; refine the grid"
                )
    if not ladder:
        raise ValueError(f"dt_max={dt_max} is below the grid resolution {res}; refine the grid")
    return ladder


def test_stochastic_continuity(
    paths: Sequence[VectorPath],
    s: float,
    epsilons: Sequence[float],
    floor: float = 0.05,
    dt_max: float | None = None,
    levels: int | None = None,
    seed=None,
) -> TestReport:
    """Exceedance probabilities must shrink along a dyadic ladder of step sizes.

    Passes when, for every epsilon, ``p(dt)`` is non-increasing as ``dt``
    halves (allowing two combined standard errors) and ``p`` at the smallest
    step is below ``floor``.
    """
    T = _horizon(paths)
    if not 0 < s < T:
        raise ValueError(f"s must lie strictly inside (0, {T})")
    ladder = dyadic_ladder(paths[0].grid, s, dt_max, levels)
    R = len(paths)
    norms = {dt: np.sqrt(np.sum(increments(paths, s, s + dt) ** 2, axis=1)) for dt in ladder}
    passed = True
    worst = 0.0
    table = {}
    for eps in epsilons:
        probs = [float(np.mean(norms[dt] > eps)) for dt in ladder]
        ses = [math.sqrt(p * (1 - p) / R) for p in probs]
        monotone = all(p1 <= p0 + 2 * math.hypot(s0, s1) for p0, p1, s0, s1 in zip(probs, probs[1:], ses, ses[1:]))
        passed = passed and monotone and probs[-1] < floor
        worst = max(worst, probs[-1])
        table[repr(float(eps))] = probs
    return TestReport(
        "stochastic_continuity", worst, None, floor, passed, R, seed, {"s": s, "ladder": ladder, "probabilities": table}
    )


test_stochastic_continuity.__test__ = False


def test_version_identity(
    paths: Sequence[VectorPath],
    bundles: Sequence[CylindricalPathBundle],
    S: HilbertSchmidtOp,
    directions: Sequence[CoordinateVector],
    tolerance: float = 1e-10,
    seed=None,
) -> TestReport:
    """Largest version defect over paired (path, bundle) and the given directions."""
    worst = max(version_defect(Y, b, S, g) for Y, b in zip(paths, bundles) for g in directions)
    return TestReport("version_defect", worst, None, tolerance, worst <= tolerance, len(paths), seed)


test_version_identity.__test__ = False


def cf_match(
    model: CoordinateLevyModel,
    S: HilbertSchmidtOp,
    g: CoordinateVector,
    t: float,
    u_grid,
    replications: int,
    seed: int,
    grid: TimeGrid | None = None,
    paths: Sequence[VectorPath] | None = None,
    tolerance_factor: float = 4.0,
) -> TestReport:
    """Empirical cf of ``<Y_t, g>`` against the closed form at ``S^* g``.

    Paths are simulated on ``grid`` (default: ``[0, t]`` in one step) unless
    passed in; passed-in paths must be built from the full operator ``S``.
    """
    if not model.has_closed_form_cf:
        raise ValueError(
            "model has no closed-form characteristic function; use ks_two_sample or compare "
            "empirical characteristic functions of two samples instead"
        )
    if paths is None:
        grid = TimeGrid.uniform(t, 1) if grid is None else grid
        paths = radonify_ensemble(model, S, grid, replications, seed)
    samples = np.array([p.value_at(t) @ g.coords for p in paths])
    u = np.asarray(u_grid, dtype=float)
    target = closed_form_cf(model, S.adjoint().apply(g), t, u)
    gap = float(np.max(np.abs(empirical_cf(samples, u) - target)))
    tol = tolerance_factor / math.sqrt(len(paths))
    return TestReport("cf_match", gap, None, tol, gap < tol, len(paths), seed, {"t": t, "model": model.describe()})


def _jsonable(row: dict) -> dict:
    def convert(x):
        if isinstance(x, dict):
            return {str(k): convert(v) for k, v in x.items()}
        if isinstance(x, (list, tuple)):
            return [convert(v) for v in x]
        if isinstance(x, (np.floating, np.integer, np.bool_)):
            return x.item()
        return x

    return convert(row)


def write_reports_jsonl(reports: Iterable[TestReport], path, extra: dict | None = None, append: bool = True) -> None:
    with Path(path).open("a" if append else "w") as fh:
        for report in reports:
            row = report.to_dict()
            if extra:
                row.update(extra)
            fh.write(json.dumps(_jsonable(row), sort_keys=True) + "\n")


def write_summary_csv(reports: Iterable[TestReport], path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["name", "statistic", "p_value", "passed", "seed"])
        for r in reports:
            writer.writerow(
                [r.name, repr(float(r.statistic)), "" if r.p_value is None else repr(float(r.p_value)), r.passed, r.seed]
            )

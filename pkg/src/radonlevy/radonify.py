"""Radonification of a cylindrical bundle through a Hilbert-Schmidt operator.

Given a bundle ``X`` on H and ``S = sum_k lambda_k <h_k, .> g_k`` from H to G,
the G-valued path is the partial singular series

    Y_t = sum_{k < n} lambda_k X_t(h_k) g_k,

which satisfies ``<Y_t, g> = X_t(S_n^* g)`` for the adjoint of the first
``n`` triples.  The sup-norm gap between two partial sums is governed by the
singular-value tail ``sum_{k >= m} lambda_k**2``.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .cylindrical import CoordinateLevyModel, CylindricalPathBundle, TimeGrid, evaluate, simulate_bundle
from .hilbert import CoordinateVector, HilbertSchmidtOp, Space

__all__ = [
    "CAUCHY_CONSTANT",
    "VectorPath",
    "CauchyProbeReport",
    "provenance_token",
    "radonify_series",
    "radonify_ensemble",
    "version_defect",
    "partial_sum_gap",
    "cauchy_bound_value",
    "martingale_gap_bound",
    "cauchy_probe",
    "cauchy_probes",
    "bare_series_norm",
    "write_probe_reports",
]

CAUCHY_CONSTANT = math.sqrt(math.e) / (math.sqrt(math.e) - 1.0)


def provenance_token(bundle: CylindricalPathBundle, S: HilbertSchmidtOp, n: int) -> str:
    digest = hashlib.sha256()
    digest.update(bundle.token.encode())
    digest.update(S.fingerprint.encode())
    digest.update(str(int(n)).encode())
    return digest.hexdigest()


@dataclass(frozen=True, eq=False)
class VectorPath:
    """A G-valued cadlag path; ``values[i]`` is ``Y`` at ``grid.times[i]``."""

    grid: TimeGrid
    values: np.ndarray
    truncation_n: int
    space: Space
    provenance: str = ""

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (len(self.grid), self.space.dim):
            raise ValueError(f"values shape {values.shape} does not fit ({len(self.grid)}, {self.space.dim})")
        if not np.all(np.isfinite(values)):
            raise ValueError("vector path has non-finite entries")
        if np.any(values[0] != 0.0):
            raise ValueError("vector path must start at the zero vector")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def value_at(self, t: float) -> np.ndarray:
        """Right-continuous step value at time ``t``."""
        return self.values[self.grid.index(t)]

    def vector_at(self, t: float) -> CoordinateVector:
        return CoordinateVector(self.value_at(t), self.space)

    def project(self, g: CoordinateVector) -> np.ndarray:
        """``t -> <Y_t, g>`` on the grid."""
        if g.space != self.space:
            raise ValueError(f"direction lives in {g.space.name!r}, path lives in {self.space.name!r}")
        return self.values @ g.coords

    def sup_norm(self) -> float:
        return float(np.sqrt(np.max(np.sum(self.values**2, axis=1))))

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t"] + [f"y_{j}" for j in range(self.space.dim)])
            for t, row in zip(self.grid.times, self.values):
                writer.writerow([repr(float(t))] + [repr(float(x)) for x in row])


def _coefficients(bundle: CylindricalPathBundle, S: HilbertSchmidtOp, m: int, n: int) -> np.ndarray:
    """Columns ``lambda_k X_t(h_k)`` for ``m <= k < n``, one row per grid time."""
    return bundle.coord_paths @ S.left[m:n].T * S.singular_values[m:n]


def _check_pair(bundle: CylindricalPathBundle, S: HilbertSchmidtOp) -> None:
    if S.domain.dim != bundle.K or S.domain.name != "H":
        raise ValueError(
            f"operator domain {S.domain.name!r} (dim {S.domain.dim}) does not match the bundle's H (K={bundle.K})"
        )


def radonify_series(bundle: CylindricalPathBundle, S: HilbertSchmidtOp, n: int | None = None) -> VectorPath:
    """Partial singular series of the first ``n`` triples (all of them by default)."""
    _check_pair(bundle, S)
    n = S.rank if n is None else n
    if int(n) != n or not 0 <= n <= S.rank:
        raise ValueError(f"truncation {n} outside [0, {S.rank}]")
    n = int(n)
    values = _coefficients(bundle, S, 0, n) @ S.right[:n]
    return VectorPath(bundle.grid, values, n, S.codomain, provenance_token(bundle, S, n))


def radonify_ensemble(
    model: CoordinateLevyModel,
    S: HilbertSchmidtOp,
    grid: TimeGrid,
    replications: int,
    seed: int,
    n: int | None = None,
    start: int = 0,
) -> list[VectorPath]:
    """Radonified paths of replications ``start .. start + replications - 1``."""
    return [
        radonify_series(simulate_bundle(model, grid, S.domain.dim, seed, r), S, n)
        for r in range(start, start + replications)
    ]


def version_defect(Y: VectorPath, bundle: CylindricalPathBundle, S: HilbertSchmidtOp, g: CoordinateVector) -> float:
    """``sup_t |<Y_t, g> - X_t(S_n^* g)|`` over the grid.

    ``S_n^*`` is the adjoint of the same ``n`` triples that built ``Y``.
    """
    if Y.provenance != provenance_token(bundle, S, Y.truncation_n):
        raise ValueError("vector path was not built from this bundle and operator")
    adjoint = S.truncate(Y.truncation_n).adjoint()
    lhs = Y.project(g)
    rhs = evaluate(bundle, adjoint.apply(g))
    return float(np.max(np.abs(lhs - rhs)))


def partial_sum_gap(
    bundle: CylindricalPathBundle, S: HilbertSchmidtOp, m: int, n: int, method: str = "direct"
) -> float:
    """``sup_t ||Y_n(t) - Y_m(t)||`` for one replication.

    ``method="direct"`` differences the two vector paths in G coordinates;
    ``method="parseval"`` uses ``(sum_{m <= k < n} lambda_k**2 X_t(h_k)**2)**0.5``.
    """
    if not 0 <= m <= n <= S.rank:
        raise ValueError(f"need 0 <= m <= n <= {S.rank}, got m={m}, n={n}")
    if method == "direct":
        diff = radonify_series(bundle, S, n).values - radonify_series(bundle, S, m).values
        return float(np.sqrt(np.max(np.sum(diff**2, axis=1))))
    if method == "parseval":
        _check_pair(bundle, S)
        coeffs = _coefficients(bundle, S, m, n)
        return float(np.sqrt(np.max(np.sum(coeffs**2, axis=1)))) if n > m else 0.0
    raise ValueError(f"method must be 'direct' or 'parseval', got {method!r}")


def cauchy_bound_value(epsilon: float, delta: float, rho: float, tail_sq: float) -> float:
    """Probe value ``c (delta + 2 tail_sq / (rho**2 epsilon**2))`` with ``c = sqrt(e)/(sqrt(e)-1)``.

    ``delta`` and ``rho`` come from the continuity of the cylindrical process;
    they are free parameters here, and the value is not a certified envelope.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if delta < 0 or tail_sq < 0:
        raise ValueError("delta and tail_sq must be non-negative")
    return CAUCHY_CONSTANT * (delta + 2.0 * tail_sq / (rho**2 * epsilon**2))


def martingale_gap_bound(tail_sq: float, T: float, epsilon: float) -> float:
    """Doob's maximal inequality for the Wiener gap: ``P(sup ||Y_n - Y_m|| > eps) <= tail_sq T / eps**2``."""
    return tail_sq * T / epsilon**2


@dataclass(frozen=True)
class CauchyProbeReport:
    m: int
    n: int
    epsilon: float
    empirical_prob: float
    tail_sq: float
    replications: int

    @property
    def std_error(self) -> float:
        p = self.empirical_prob
        return math.sqrt(p * (1.0 - p) / self.replications)

    def to_dict(self) -> dict:
        return asdict(self)


def cauchy_probes(
    bundles: Iterable[CylindricalPathBundle],
    S: HilbertSchmidtOp,
    pairs: Sequence[tuple[int, int]],
    epsilons: Sequence[float],
) -> list[CauchyProbeReport]:
    """One report per (pair, epsilon), in that nesting order."""
    for m, n in pairs:
        if not 0 <= m <= n <= S.rank:
            raise ValueError(f"probe pair ({m}, {n}) violates 0 <= m <= n <= {S.rank}")
    gaps = np.array([[partial_sum_gap(b, S, m, n, method="parseval") for m, n in pairs] for b in bundles])
    if gaps.size == 0:
        raise ValueError("no replications to probe")
    reports = []
    for j, (m, n) in enumerate(pairs):
        for eps in epsilons:
            if not eps > 0:
                raise ValueError(f"epsilon must be positive, got {eps}")
            reports.append(
                CauchyProbeReport(
                    m=int(m),
                    n=int(n),
                    epsilon=float(eps),
                    empirical_prob=float(np.mean(gaps[:, j] > eps)),
                    tail_sq=S.tail_norm_sq(m),
                    replications=gaps.shape[0],
                )
            )
    return reports


def cauchy_probe(bundles, S, m, n, epsilon) -> CauchyProbeReport:
    return cauchy_probes(bundles, S, [(m, n)], [epsilon])[0]


def write_probe_reports(reports: Iterable[CauchyProbeReport], path, extra: dict | None = None) -> None:
    with Path(path).open("w") as fh:
        for report in reports:
            row = report.to_dict()
            if extra:
                row.update(extra)
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def bare_series_norm(bundle: CylindricalPathBundle, n: int, t: float) -> float:
    """``(sum_{k < n} beta_k(t)**2)**0.5``: the series without any smoothing operator."""
    if int(n) != n or not 0 <= n <= bundle.K:
        raise ValueError(f"n must lie in [0, {bundle.K}], got {n}")
    if not bundle.grid.on_grid(t):
        raise ValueError(f"time {t} is not a grid time")
    row = bundle.coord_paths[bundle.grid.index(t), : int(n)]
    return float(np.sqrt(np.sum(row**2)))

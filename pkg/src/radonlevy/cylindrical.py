"""Cylindrical Levy processes realized through coordinate Levy paths.

A bundle holds ``K`` scalar cadlag paths ``beta_k`` on a shared time grid.
The cylindrical process acts on ``h`` in H by ``X_t(h) = sum_k h_k beta_k(t)``,
so one bundle serves every ``h`` and evaluation is linear pathwise.

Three coordinate models are built in:

* ``wiener``: independent standard Brownian coordinates.
* ``compound_poisson``: one Poisson clock shared by every coordinate; the n-th
  arrival adds an i.i.d. jump vector ``xi_n``.
* ``stable``: independent symmetric alpha-stable coordinates.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from .hilbert import CoordinateVector, Space
from .streams import ReplicationStreams, check_seed

__all__ = [
    "TimeGrid",
    "ModelKind",
    "JumpLaw",
    "NormalJumps",
    "RademacherJumps",
    "UniformJumps",
    "CallableJumps",
    "jump_law_from_dict",
    "CoordinateLevyModel",
    "CylindricalPathBundle",
    "simulate_bundle",
    "simulate_bundles",
    "evaluate",
    "poisson_clock",
    "closed_form_cf",
    "symmetric_stable",
]


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Strictly increasing times starting at 0.

    ``resolution`` is the spacing of the user grid before any event times
    were inserted; statistical ladders must not go below it.
    """

    times: np.ndarray
    resolution: float = None

    def __post_init__(self):
        times = np.array(self.times, dtype=float).reshape(-1)
        if times.size == 0 or times[0] != 0.0:
            raise ValueError("time grid must start at 0")
        if not np.all(np.isfinite(times)):
            raise ValueError("time grid has non-finite entries")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("time grid must be strictly increasing")
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        if self.resolution is None:
            res = float(np.min(np.diff(times))) if times.size > 1 else 0.0
            object.__setattr__(self, "resolution", res)

    @classmethod
    def uniform(cls, T: float, steps: int) -> "TimeGrid":
        if T <= 0:
            raise ValueError(f"horizon T must be positive, got {T}")
        if int(steps) != steps or steps < 1:
            raise ValueError(f"steps must be a positive integer, got {steps}")
        return cls(np.linspace(0.0, T, int(steps) + 1), T / steps)

    @property
    def T(self) -> float:
        return float(self.times[-1])

    def __len__(self) -> int:
        return self.times.size

    def insert(self, event_times) -> "TimeGrid":
        """New grid containing the given event times as grid points."""
        events = np.asarray(event_times, dtype=float).reshape(-1)
        if events.size == 0:
            return self
        if events.min() < 0 or events.max() > self.T:
            raise ValueError("event times must lie in [0, T]")
        return TimeGrid(np.union1d(self.times, events), self.resolution)

    def index(self, t: float) -> int:
        """Index of the last grid time ``<= t`` (with a small round-off allowance)."""
        slack = 1e-12 * max(1.0, abs(self.T))
        i = int(np.searchsorted(self.times, t + slack, side="right")) - 1
        if i < 0:
            raise ValueError(f"time {t} precedes the grid")
        return i

    def on_grid(self, t: float) -> bool:
        slack = 1e-9 * max(1.0, abs(self.T))
        return abs(self.times[self.index(t)] - t) <= slack

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeGrid):
            return NotImplemented
        return np.array_equal(self.times, other.times) and self.resolution == other.resolution

    __hash__ = None


# -- jump laws ---------------------------------------------------------------


class JumpLaw:
    """Law of a single jump coordinate for the compound Poisson model."""

    name = "custom"

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def cf(self, v):
        """Characteristic function ``E exp(i v xi)`` of one coordinate."""
        raise NotImplementedError(f"jump law {self.name!r} has no closed-form characteristic function")

    @property
    def has_cf(self) -> bool:
        return type(self).cf is not JumpLaw.cf

    def describe(self) -> dict:
        return {"name": self.name}


@dataclass(frozen=True)
class NormalJumps(JumpLaw):
    scale: float = 1.0
    name = "normal"

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"jump_law.scale must be positive, got {self.scale}")

    def sample(self, rng, size):
        return self.scale * rng.standard_normal(size)

    def cf(self, v):
        return np.exp(-0.5 * (self.scale * np.asarray(v)) ** 2)

    def describe(self):
        return {"name": self.name, "scale": self.scale}


@dataclass(frozen=True)
class RademacherJumps(JumpLaw):
    scale: float = 1.0
    name = "rademacher"

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"jump_law.scale must be positive, got {self.scale}")

    def sample(self, rng, size):
        return self.scale * (2.0 * rng.integers(0, 2, size) - 1.0)

    def cf(self, v):
        return np.cos(self.scale * np.asarray(v))

    def describe(self):
        return {"name": self.name, "scale": self.scale}


@dataclass(frozen=True)
class UniformJumps(JumpLaw):
    """Uniform on ``[-scale, scale]``."""

    scale: float = 1.0
    name = "uniform"

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"jump_law.scale must be positive, got {self.scale}")

    def sample(self, rng, size):
        return rng.uniform(-self.scale, self.scale, size)

    def cf(self, v):
        return np.sinc(self.scale * np.asarray(v) / np.pi)

    def describe(self):
        return {"name": self.name, "scale": self.scale}


@dataclass(frozen=True)
class CallableJumps(JumpLaw):
    """User sampler ``sampler(rng, size)``; no closed-form characteristic function."""

    sampler: object = None
    name = "custom"

    def sample(self, rng, size):
        return np.asarray(self.sampler(rng, size), dtype=float)


_JUMP_LAWS = {"normal": NormalJumps, "rademacher": RademacherJumps, "uniform": UniformJumps}


def jump_law_from_dict(doc: dict) -> JumpLaw:
    doc = dict(doc)
    name = doc.pop("name", "normal")
    if name not in _JUMP_LAWS:
        raise ValueError(f"jump_law.name must be one of {sorted(_JUMP_LAWS)}, got {name!r}")
    return _JUMP_LAWS[name](**doc)


# -- models ------------------------------------------------------------------


class ModelKind(str, enum.Enum):
    WIENER = "wiener"
    COMPOUND_POISSON = "compound_poisson"
    STABLE = "stable"


@dataclass(frozen=True)
class CoordinateLevyModel:
    """Which coordinate Levy process to simulate, and its parameters.

    Use the :meth:`wiener`, :meth:`compound_poisson` and :meth:`stable`
    constructors; parameters that do not belong to ``kind`` must be ``None``.
    """

    kind: ModelKind
    intensity: float | None = None
    jump_law: JumpLaw | None = None
    alpha: float | None = None

    def __post_init__(self):
        try:
            kind = ModelKind(self.kind)
        except ValueError:
            raise ValueError(f"kind must be one of {[k.value for k in ModelKind]}, got {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        if kind is ModelKind.COMPOUND_POISSON:
            if self.intensity is None or not self.intensity > 0 or not math.isfinite(self.intensity):
                raise ValueError(f"intensity must be a positive finite number, got {self.intensity!r}")
            if self.jump_law is None:
                object.__setattr__(self, "jump_law", NormalJumps())
            elif not isinstance(self.jump_law, JumpLaw):
                raise ValueError(f"jump_law must be a JumpLaw, got {self.jump_law!r}")
        else:
            if self.intensity is not None:
                raise ValueError(f"intensity is only valid for compound_poisson, not {kind.value}")
            if self.jump_law is not None:
                raise ValueError(f"jump_law is only valid for compound_poisson, not {kind.value}")
        if kind is ModelKind.STABLE:
            if self.alpha is None or not 0 < self.alpha < 2:
                raise ValueError(f"alpha must lie in (0, 2), got {self.alpha!r}")
        elif self.alpha is not None:
            raise ValueError(f"alpha is only valid for stable, not {kind.value}")

    @classmethod
    def wiener(cls) -> "CoordinateLevyModel":
        return cls(ModelKind.WIENER)

    @classmethod
    def compound_poisson(cls, intensity: float, jump_law: JumpLaw | None = None) -> "CoordinateLevyModel":
        return cls(ModelKind.COMPOUND_POISSON, intensity=intensity, jump_law=jump_law)

    @classmethod
    def stable(cls, alpha: float) -> "CoordinateLevyModel":
        return cls(ModelKind.STABLE, alpha=alpha)

    def describe(self) -> dict:
        doc = {"kind": self.kind.value}
        if self.kind is ModelKind.COMPOUND_POISSON:
            doc["intensity"] = self.intensity
            doc["jump_law"] = self.jump_law.describe()
        if self.kind is ModelKind.STABLE:
            doc["alpha"] = self.alpha
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "CoordinateLevyModel":
        doc = dict(doc)
        kind = doc.pop("kind", None)
        jump = doc.pop("jump_law", None)
        if jump is not None:
            doc["jump_law"] = jump_law_from_dict(jump) if isinstance(jump, dict) else jump
        unknown = set(doc) - {"intensity", "jump_law", "alpha"}
        if unknown:
            raise ValueError(f"unknown model parameters: {sorted(unknown)}")
        return cls(kind, **doc)

    @property
    def has_closed_form_cf(self) -> bool:
        return self.kind is not ModelKind.COMPOUND_POISSON or self.jump_law.has_cf


# -- bundles -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CylindricalPathBundle:
    """``K`` coordinate paths of one replication; ``coord_paths[i, k] = beta_k(grid.times[i])``."""

    grid: TimeGrid
    coord_paths: np.ndarray
    model: CoordinateLevyModel
    seed: int
    replication: int = 0
    event_times: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        paths = np.array(self.coord_paths, dtype=float)
        if paths.ndim != 2 or paths.shape[0] != len(self.grid):
            raise ValueError(f"coord_paths shape {paths.shape} does not fit a grid of {len(self.grid)} times")
        paths.setflags(write=False)
        events = np.array(self.event_times, dtype=float).reshape(-1)
        events.setflags(write=False)
        object.__setattr__(self, "coord_paths", paths)
        object.__setattr__(self, "event_times", events)

    @property
    def K(self) -> int:
        return self.coord_paths.shape[1]

    @property
    def space(self) -> Space:
        return Space("H", self.K)

    @property
    def token(self) -> str:
        """Provenance hash of the randomness behind this bundle."""
        digest = hashlib.sha256()
        digest.update(json.dumps(self.metadata(), sort_keys=True).encode())
        digest.update(self.grid.times.tobytes())
        return digest.hexdigest()

    def metadata(self) -> dict:
        return {
            "model": self.model.describe(),
            "seed": self.seed,
            "replication": self.replication,
            "K": self.K,
            "event_times": self.event_times.tolist(),
        }

    def to_csv(self, path) -> None:
        """Write columns ``t, beta_0 .. beta_{K-1}`` and a JSON sidecar next to it."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t"] + [f"beta_{k}" for k in range(self.K)])
            for t, row in zip(self.grid.times, self.coord_paths):
                writer.writerow([repr(float(t))] + [repr(float(x)) for x in row])
        path.with_suffix(".json").write_text(json.dumps(self.metadata(), sort_keys=True, indent=2) + "\n")


def symmetric_stable(rng: np.random.Generator, alpha: float, size: int) -> np.ndarray:
    """Standard symmetric alpha-stable draws, ``E exp(iuX) = exp(-|u|**alpha)``.

    Chambers-Mallows-Stuck transform of a uniform angle and a unit exponential.
    """
    v = rng.uniform(-np.pi / 2, np.pi / 2, size)
    w = rng.standard_exponential(size)
    if alpha == 1.0:
        return np.tan(v)
    return (
        np.sin(alpha * v)
        / np.cos(v) ** (1.0 / alpha)
        * (np.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha)
    )


def poisson_clock(intensity: float, T: float, seed: int, replication: int = 0) -> np.ndarray:
    """Arrival times in ``[0, T]`` of a Poisson process with rate ``intensity``."""
    if not intensity > 0:
        raise ValueError(f"intensity must be positive, got {intensity}")
    if T < 0:
        raise ValueError(f"horizon T must be non-negative, got {T}")
    if T == 0:
        return np.zeros(0)
    rng = ReplicationStreams(seed, replication).clock()
    chunk = max(16, int(2 * intensity * T) + 16)
    arrivals = np.cumsum(rng.standard_exponential(chunk)) / intensity
    while arrivals[-1] <= T:
        more = arrivals[-1] + np.cumsum(rng.standard_exponential(chunk)) / intensity
        arrivals = np.concatenate([arrivals, more])
    return arrivals[arrivals <= T]


def simulate_bundle(
    model: CoordinateLevyModel, grid: TimeGrid, K: int, seed: int, replication: int = 0
) -> CylindricalPathBundle:
    """Simulate one replication of the coordinate paths.

    Coordinate ``k`` of replication ``r`` is a pure function of
    ``(model, grid, seed, r, k)``; raising ``K`` only appends coordinates.
    """
    if int(K) != K or K < 1:
        raise ValueError(f"K must be a positive integer, got {K}")
    if not isinstance(model, CoordinateLevyModel):
        raise ValueError(f"model must be a CoordinateLevyModel, got {model!r}")
    seed = check_seed(seed)
    K = int(K)
    streams = ReplicationStreams(seed, replication)
    events = np.zeros(0)

    if model.kind is ModelKind.COMPOUND_POISSON:
        events = poisson_clock(model.intensity, grid.T, seed, replication)
        grid = grid.insert(events)
        arrivals_by_time = np.searchsorted(events, grid.times, side="right")
        paths = np.empty((len(grid), K))
        for k in range(K):
            jumps = model.jump_law.sample(streams.coordinate(k), events.size)
            paths[:, k] = np.concatenate([[0.0], np.cumsum(jumps)])[arrivals_by_time]
    else:
        dt = np.diff(grid.times)
        paths = np.zeros((len(grid), K))
        for k in range(K):
            rng = streams.coordinate(k)
            if model.kind is ModelKind.WIENER:
                increments = rng.standard_normal(dt.size) * np.sqrt(dt)
            else:
                increments = symmetric_stable(rng, model.alpha, dt.size) * dt ** (1.0 / model.alpha)
            np.cumsum(increments, out=paths[1:, k])

    return CylindricalPathBundle(grid, paths, model, seed, int(replication), events)


def simulate_bundles(
    model: CoordinateLevyModel, grid: TimeGrid, K: int, seed: int, replications: int, start: int = 0
) -> Iterator[CylindricalPathBundle]:
    for r in range(start, start + replications):
        yield simulate_bundle(model, grid, K, seed, r)


def evaluate(bundle: CylindricalPathBundle, h: CoordinateVector) -> np.ndarray:
    """Values of ``t -> X_t(h)`` on ``bundle.grid``."""
    if h.space.dim != bundle.K or h.space.name != "H":
        raise ValueError(
            f"bundle lives on H with K={bundle.K}; got vector in {h.space.name!r} of dimension {h.space.dim}"
        )
    return bundle.coord_paths @ h.coords


def closed_form_cf(model: CoordinateLevyModel, h: CoordinateVector, t: float, u):
    """``E exp(i u X_t(h))`` for the built-in models; ``u`` may be an array."""
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    u = np.asarray(u, dtype=float)
    coords = h.coords
    if model.kind is ModelKind.WIENER:
        out = np.exp(-0.5 * t * u**2 * float(coords @ coords))
    elif model.kind is ModelKind.STABLE:
        out = np.exp(-t * np.abs(u) ** model.alpha * float(np.sum(np.abs(coords) ** model.alpha)))
    else:
        if not model.jump_law.has_cf:
            raise ValueError(
                f"jump law {model.jump_law.name!r} has no closed-form characteristic function; "
                "compare empirical characteristic functions instead"
            )
        marginals = model.jump_law.cf(np.multiply.outer(u, coords))
        out = np.exp(model.intensity * t * (np.prod(marginals, axis=-1) - 1.0))
    out = np.asarray(out, dtype=complex)
    return complex(out) if out.ndim == 0 else out

"""Experiment configuration: a YAML file validated into :class:`ExperimentConfig`."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .cylindrical import CoordinateLevyModel, TimeGrid
from .hilbert import CoordinateVector, HilbertSchmidtOp, Space, diagonal_operator, random_operator
from .streams import check_seed

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_config", "default_config_path"]

KNOWN_TESTS = ("zero_start", "stationarity", "independence", "stochastic_continuity", "version_defect")


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists one ``field: message`` per problem."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


def default_config_path() -> Path:
    return Path(str(resources.files("radonlevy") / "configs" / "default.yaml"))


def _u_grid(doc, where, errors):
    if isinstance(doc, dict):
        try:
            return np.linspace(float(doc["start"]), float(doc["stop"]), int(doc["num"]))
        except (KeyError, TypeError, ValueError):
            errors.append(f"{where}: expected {{start, stop, num}}")
            return np.zeros(1)
    try:
        return np.asarray(doc, dtype=float).reshape(-1)
    except (TypeError, ValueError):
        errors.append(f"{where}: expected a list of numbers or {{start, stop, num}}")
        return np.zeros(1)


@dataclass
class ExperimentConfig:
    model: CoordinateLevyModel
    operator: HilbertSchmidtOp
    grid: TimeGrid
    K: int
    n: int
    probe_pairs: list
    replications: int
    seed: int
    tests: dict
    convergence: dict
    cf_check: dict
    export: int
    output_dir: Path
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def config_hash(self) -> str:
        """SHA-256 of the canonical config, ignoring ``output_dir``."""
        doc = {k: v for k, v in self.raw.items() if k != "output_dir"}
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()

    def direction(self, spec) -> CoordinateVector:
        G = self.operator.codomain
        if isinstance(spec, int):
            return G.basis(spec)
        return CoordinateVector(np.asarray(spec, dtype=float), G)


def _build_operator(doc, K, base_dir, errors):
    if not isinstance(doc, dict):
        errors.append("operator: expected a mapping")
        return None
    kind = doc.get("kind", "diagonal")
    K_G = doc.get("K_G", K)
    try:
        if kind in ("diagonal", "random"):
            if "lambdas" in doc:
                lam = np.asarray(doc["lambdas"], dtype=float)
            else:
                rank = int(doc.get("rank", min(K, K_G)))
                lam = float(doc.get("decay", 0.5)) ** np.arange(rank)
            if kind == "diagonal":
                return diagonal_operator(lam, K, K_G)
            rng = np.random.default_rng(check_seed(doc.get("seed", 0)))
            return random_operator(lam, K, K_G, rng)
        if kind == "inline":
            return HilbertSchmidtOp.from_dict({"K_H": K, "K_G": K_G, **{k: doc[k] for k in ("lambda", "left", "right")}})
        if kind == "file":
            path = Path(doc["path"])
            if not path.is_absolute():
                path = base_dir / path
            if not path.exists():
                errors.append(f"operator.path: file not found: {path}")
                return None
            op = HilbertSchmidtOp.from_json(path)
            if op.domain.dim != K:
                errors.append(f"operator.path: operator K_H={op.domain.dim} does not match truncations.K={K}")
            return op
        errors.append(f"operator.kind: must be diagonal, random, inline or file, got {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        errors.append(f"operator: {exc}")
    return None


def parse_config(doc: dict, base_dir: Path | None = None, seed=None, output_dir=None) -> ExperimentConfig:
    """Validate a config mapping; ``seed`` and ``output_dir`` override the file."""
    if not isinstance(doc, dict):
        raise ConfigError(["<root>: expected a mapping"])
    raw = copy.deepcopy(doc)
    if seed is not None:
        raw["seed"] = seed
    if output_dir is not None:
        raw["output_dir"] = str(output_dir)
    base_dir = Path(".") if base_dir is None else base_dir
    errors: list[str] = []

    try:
        seed_value = check_seed(raw.get("seed", 0))
    except (TypeError, ValueError) as exc:
        errors.append(f"seed: {exc}")
        seed_value = 0

    reps = raw.get("replications", 1000)
    if not isinstance(reps, int) or isinstance(reps, bool) or reps < 1:
        errors.append(f"replications: must be an integer >= 1, got {reps!r}")
        reps = 1

    try:
        model = CoordinateLevyModel.from_dict(raw.get("model", {"kind": "wiener"}))
    except (TypeError, ValueError) as exc:
        errors.append(f"model: {exc}")
        model = None

    grid_doc = raw.get("grid", {})
    grid = None
    steps = grid_doc.get("steps", 64)
    T = grid_doc.get("T", 1.0)
    if not isinstance(steps, int) or steps < 1:
        errors.append(f"grid.steps: must be an integer >= 1, got {steps!r}")
    elif not isinstance(T, (int, float)) or not T > 0:
        errors.append(f"grid.T: must be a positive number, got {T!r}")
    else:
        grid = TimeGrid.uniform(float(T), steps)

    trunc = raw.get("truncations", {})
    K = trunc.get("K", 32)
    if not isinstance(K, int) or K < 1:
        errors.append(f"truncations.K: must be an integer >= 1, got {K!r}")
        K = 1
    operator = _build_operator(raw.get("operator", {}), K, base_dir, errors)
    N = operator.rank if operator is not None else 0
    n = trunc.get("n", N)
    if operator is not None and (not isinstance(n, int) or not 0 <= n <= N):
        errors.append(f"truncations.n: must lie in [0, {N}], got {n!r}")
    pairs = trunc.get("probe_pairs", [])
    for i, pair in enumerate(pairs):
        if not (isinstance(pair, (list, tuple)) and len(pair) == 2 and all(isinstance(x, int) for x in pair)):
            errors.append(f"truncations.probe_pairs[{i}]: expected [m, n] integers")
        elif operator is not None and not 0 <= pair[0] <= pair[1] <= N:
            errors.append(f"truncations.probe_pairs[{i}]: need 0 <= m <= n <= {N}, got {pair}")

    tests = copy.deepcopy(raw.get("tests", {name: {} for name in KNOWN_TESTS}))
    if not isinstance(tests, dict):
        errors.append("tests: expected a mapping of test name to parameters")
        tests = {}
    for name, params in tests.items():
        if name not in KNOWN_TESTS:
            errors.append(f"tests.{name}: unknown test; choose from {list(KNOWN_TESTS)}")
            continue
        params = params or {}
        tests[name] = params
        if "alpha" in params and not (isinstance(params["alpha"], (int, float)) and 0 < params["alpha"] < 1):
            errors.append(f"tests.{name}.alpha: must lie in (0, 1), got {params['alpha']!r}")
        if "u_grid" in params:
            params["u_grid"] = _u_grid(params["u_grid"], f"tests.{name}.u_grid", errors)

    cf_doc = dict(raw.get("cf_check", {}))
    cf_doc["u_grid"] = _u_grid(cf_doc.get("u_grid", {"start": -4, "stop": 4, "num": 21}), "cf_check.u_grid", errors)
    conv = dict(raw.get("convergence", {}))
    for i, bn in enumerate(conv.get("bare_n", [])):
        if not isinstance(bn, int) or not 0 <= bn <= K:
            errors.append(f"convergence.bare_n[{i}]: must lie in [0, {K}], got {bn!r}")

    export = raw.get("export", 1)
    if not isinstance(export, int) or export < 0:
        errors.append(f"export: must be a non-negative integer, got {export!r}")

    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(
        model=model,
        operator=operator,
        grid=grid,
        K=K,
        n=n,
        probe_pairs=[tuple(p) for p in pairs],
        replications=reps,
        seed=seed_value,
        tests=tests,
        convergence=conv,
        cf_check=cf_doc,
        export=min(export, reps),
        output_dir=Path(raw.get("output_dir", "out")),
        raw=raw,
    )


def load_config(path=None, seed=None, output_dir=None) -> ExperimentConfig:
    path = default_config_path() if path is None else Path(path)
    if not path.exists():
        raise ConfigError([f"--config: file not found: {path}"])
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError([f"--config: could not parse YAML: {exc}"]) from None
    return parse_config(doc or {}, base_dir=path.parent, seed=seed, output_dir=output_dir)

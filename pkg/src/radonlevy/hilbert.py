"""Coordinate model of separable Hilbert spaces and Hilbert-Schmidt operators.

Every vector is stored as its coefficients against a fixed complete
orthonormal system, truncated to the ambient dimension ``K`` of its space.
A Hilbert-Schmidt operator is held as a list of singular triples
``(lambda_k, h_k, g_k)`` and acts by ``S(u) = sum_k lambda_k <h_k, u> g_k``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "ORTHONORMAL_TOL",
    "Space",
    "CoordinateVector",
    "HilbertSchmidtOp",
    "inner",
    "norm",
    "hs_apply",
    "hs_adjoint",
    "hs_tail_norm_sq",
    "modified_gram_schmidt",
    "orthonormality_defect",
    "diagonal_operator",
    "random_operator",
]

ORTHONORMAL_TOL = 1e-10
_HS_NORM_RTOL = 1e-12


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Space:
    """A truncated coordinate space; ``name`` tells H-vectors from G-vectors."""

    name: str
    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"space {self.name!r}: dimension must be a positive integer, got {self.dim}")

    def vector(self, coords) -> "CoordinateVector":
        return CoordinateVector(coords, self)

    def zeros(self) -> "CoordinateVector":
        return CoordinateVector(np.zeros(self.dim), self)

    def basis(self, k: int) -> "CoordinateVector":
        if not 0 <= k < self.dim:
            raise IndexError(f"basis index {k} outside space {self.name!r} of dimension {self.dim}")
        e = np.zeros(self.dim)
        e[k] = 1.0
        return CoordinateVector(e, self)

    def random(self, rng: np.random.Generator) -> "CoordinateVector":
        return CoordinateVector(rng.standard_normal(self.dim), self)


@dataclass(frozen=True, eq=False)
class CoordinateVector:
    """An element of a :class:`Space` given by its ``K`` coordinates."""

    coords: np.ndarray
    space: Space

    def __post_init__(self):
        coords = _frozen(self.coords)
        if coords.ndim != 1 or coords.shape[0] != self.space.dim:
            raise ValueError(
                f"vector of shape {coords.shape} does not match space {self.space.name!r} "
                f"of dimension {self.space.dim}"
            )
        if not np.all(np.isfinite(coords)):
            raise ValueError(f"vector in space {self.space.name!r} has non-finite coordinates")
        object.__setattr__(self, "coords", coords)

    @property
    def space_tag(self) -> str:
        return self.space.name

    def __len__(self) -> int:
        return self.space.dim

    def __add__(self, other: "CoordinateVector") -> "CoordinateVector":
        _check_same_space(self, other)
        return CoordinateVector(self.coords + other.coords, self.space)

    def __sub__(self, other: "CoordinateVector") -> "CoordinateVector":
        _check_same_space(self, other)
        return CoordinateVector(self.coords - other.coords, self.space)

    def __mul__(self, scalar: float) -> "CoordinateVector":
        return CoordinateVector(float(scalar) * self.coords, self.space)

    __rmul__ = __mul__

    def __neg__(self) -> "CoordinateVector":
        return CoordinateVector(-self.coords, self.space)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoordinateVector):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.coords, other.coords)

    __hash__ = None


def _check_same_space(u: CoordinateVector, v: CoordinateVector) -> None:
    if u.space != v.space:
        raise ValueError(
            f"space mismatch: {u.space.name!r} (dim {u.space.dim}) vs {v.space.name!r} (dim {v.space.dim})"
        )


def inner(u: CoordinateVector, v: CoordinateVector) -> float:
    """Inner product of two vectors of the same space."""
    _check_same_space(u, v)
    return float(np.dot(u.coords, v.coords))


def norm(u: CoordinateVector) -> float:
    return float(np.linalg.norm(u.coords))


def orthonormality_defect(rows: np.ndarray) -> float:
    """Largest entry of ``|rows @ rows.T - I|`` for a stack of row vectors.

    Covers both the off-diagonal inner products and the deviation of the
    squared norms from one.
    """
    rows = np.atleast_2d(rows)
    if rows.shape[0] == 0:
        return 0.0
    gram = rows @ rows.T
    defect = np.abs(gram - np.eye(rows.shape[0]))
    norms = np.sqrt(np.diag(gram))
    return float(max(defect.max(), np.abs(norms - 1.0).max()))


def modified_gram_schmidt(vectors: np.ndarray) -> np.ndarray:
    """Orthonormalize the rows of ``vectors`` in order (modified Gram-Schmidt).

    Raises ``ValueError`` when the rows are numerically dependent.
    """
    q = np.array(vectors, dtype=float, copy=True)
    if q.ndim != 2:
        raise ValueError("expected a 2-d array of row vectors")
    for i in range(q.shape[0]):
        for j in range(i):
            q[i] -= np.dot(q[j], q[i]) * q[j]
        length = np.linalg.norm(q[i])
        if length < 1e-12:
            raise ValueError(f"row {i} is linearly dependent on the previous rows")
        q[i] /= length
    return q


@dataclass(frozen=True, eq=False)
class HilbertSchmidtOp:
    """Hilbert-Schmidt operator ``S: H -> G`` stored as singular triples.

    Parameters
    ----------
    singular_values : array of shape (N,)
        The ``lambda_k``; signs are allowed.
    left : array of shape (N, K_H)
        Orthonormal rows ``h_k`` in the domain.
    right : array of shape (N, K_G)
        Orthonormal rows ``g_k`` in the codomain.
    domain, codomain : Space
        Default to spaces named ``"H"`` and ``"G"`` sized from the arrays.
    """

    singular_values: np.ndarray
    left: np.ndarray
    right: np.ndarray
    domain: Space = None
    codomain: Space = None
    _fingerprint: str = field(default="", repr=False)

    def __post_init__(self):
        lam = _frozen(self.singular_values).reshape(-1)
        left = _frozen(self.left)
        right = _frozen(self.right)
        n = lam.shape[0]
        if left.ndim != 2 or right.ndim != 2:
            raise ValueError("left and right vectors must be 2-d arrays of rows")
        domain = self.domain if self.domain is not None else Space("H", left.shape[1])
        codomain = self.codomain if self.codomain is not None else Space("G", right.shape[1])
        if left.shape != (n, domain.dim):
            raise ValueError(f"left vectors have shape {left.shape}, expected ({n}, {domain.dim})")
        if right.shape != (n, codomain.dim):
            raise ValueError(f"right vectors have shape {right.shape}, expected ({n}, {codomain.dim})")
        if n > domain.dim or n > codomain.dim:
            raise ValueError(f"{n} singular triples exceed the ambient dimensions ({domain.dim}, {codomain.dim})")
        for name, arr in (("singular_values", lam), ("left", left), ("right", right)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
        for name, rows in (("left", left), ("right", right)):
            defect = orthonormality_defect(rows)
            if defect >= ORTHONORMAL_TOL:
                raise ValueError(f"{name} vectors are not orthonormal (defect {defect:.3e})")
        object.__setattr__(self, "singular_values", lam)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "codomain", codomain)

        frob = float(np.sum(((lam[:, None] * right).T @ left) ** 2)) if n else 0.0
        total = self.hs_norm_sq
        if abs(frob - total) > _HS_NORM_RTOL * max(total, np.finfo(float).tiny) and total > 0:
            raise ValueError(f"Hilbert-Schmidt norm check failed: {frob!r} vs {total!r}")

        digest = hashlib.sha256()
        for arr in (lam, left, right):
            digest.update(np.ascontiguousarray(arr).tobytes())
        digest.update(f"{domain.name}:{domain.dim}|{codomain.name}:{codomain.dim}".encode())
        object.__setattr__(self, "_fingerprint", digest.hexdigest())

    @property
    def rank(self) -> int:
        return self.singular_values.shape[0]

    @property
    def left_vectors(self) -> list[CoordinateVector]:
        return [CoordinateVector(row, self.domain) for row in self.left]

    @property
    def right_vectors(self) -> list[CoordinateVector]:
        return [CoordinateVector(row, self.codomain) for row in self.right]

    @property
    def hs_norm_sq(self) -> float:
        return float(np.sum(self.singular_values**2))

    @property
    def hs_norm(self) -> float:
        return float(np.sqrt(self.hs_norm_sq))

    @property
    def fingerprint(self) -> str:
        """SHA-256 over the triples and the two space signatures."""
        return self._fingerprint

    def apply(self, u: CoordinateVector) -> CoordinateVector:
        if u.space != self.domain:
            raise ValueError(
                f"operator domain is {self.domain.name!r} (dim {self.domain.dim}); "
                f"got vector in {u.space.name!r} (dim {u.space.dim})"
            )
        coeffs = self.singular_values * (self.left @ u.coords)
        return CoordinateVector(coeffs @ self.right, self.codomain)

    __call__ = apply

    def adjoint(self) -> "HilbertSchmidtOp":
        return HilbertSchmidtOp(self.singular_values, self.right, self.left, self.codomain, self.domain)

    def truncate(self, n: int) -> "HilbertSchmidtOp":
        """Keep the first ``n`` triples."""
        if not 0 <= n <= self.rank:
            raise ValueError(f"truncation {n} outside [0, {self.rank}]")
        return HilbertSchmidtOp(
            self.singular_values[:n], self.left[:n], self.right[:n], self.domain, self.codomain
        )

    def tail_norm_sq(self, m: int) -> float:
        """``sum_{k >= m} lambda_k**2``, the tail controlling partial-sum gaps."""
        if not 0 <= m <= self.rank:
            raise ValueError(f"tail index {m} outside [0, {self.rank}]")
        return float(np.sum(self.singular_values[m:] ** 2))

    def dense(self) -> np.ndarray:
        """Matrix of shape (K_G, K_H) equal to ``sum_k lambda_k g_k h_k^T``."""
        return (self.singular_values[:, None] * self.right).T @ self.left

    def same_triples(self, other: "HilbertSchmidtOp") -> bool:
        return (
            self.domain == other.domain
            and self.codomain == other.codomain
            and np.array_equal(self.singular_values, other.singular_values)
            and np.array_equal(self.left, other.left)
            and np.array_equal(self.right, other.right)
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, HilbertSchmidtOp):
            return NotImplemented
        return self.same_triples(other)

    __hash__ = None

    def to_dict(self) -> dict:
        return {
            "lambda": self.singular_values.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "K_H": self.domain.dim,
            "K_G": self.codomain.dim,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "HilbertSchmidtOp":
        missing = {"lambda", "left", "right", "K_H", "K_G"} - set(doc)
        if missing:
            raise ValueError(f"operator document is missing keys: {sorted(missing)}")
        k_h, k_g = int(doc["K_H"]), int(doc["K_G"])
        lam = np.asarray(doc["lambda"], dtype=float).reshape(-1)
        n = lam.shape[0]
        left = np.asarray(doc["left"], dtype=float).reshape(n, k_h)
        right = np.asarray(doc["right"], dtype=float).reshape(n, k_g)
        return cls(lam, left, right, Space("H", k_h), Space("G", k_g))

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict())
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json(cls, source) -> "HilbertSchmidtOp":
        """Load from a JSON string or a path to a JSON file."""
        if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
            source = Path(source).read_text()
        return cls.from_dict(json.loads(source))


def hs_apply(S: HilbertSchmidtOp, u: CoordinateVector) -> CoordinateVector:
    return S.apply(u)


def hs_adjoint(S: HilbertSchmidtOp) -> HilbertSchmidtOp:
    return S.adjoint()


def hs_tail_norm_sq(S: HilbertSchmidtOp, m: int) -> float:
    return S.tail_norm_sq(m)


def diagonal_operator(singular_values, K_H: int, K_G: int | None = None) -> HilbertSchmidtOp:
    """Operator mapping the k-th basis vector of H to ``lambda_k`` times that of G."""
    lam = np.asarray(singular_values, dtype=float).reshape(-1)
    K_G = K_H if K_G is None else K_G
    n = lam.shape[0]
    return HilbertSchmidtOp(lam, np.eye(n, K_H), np.eye(n, K_G), Space("H", K_H), Space("G", K_G))


def random_operator(singular_values, K_H: int, K_G: int, rng: np.random.Generator) -> HilbertSchmidtOp:
    """Random singular vectors from orthonormalized Gaussian rows, with the given decay."""
    lam = np.asarray(singular_values, dtype=float).reshape(-1)
    n = lam.shape[0]
    left = modified_gram_schmidt(rng.standard_normal((n, K_H)))
    right = modified_gram_schmidt(rng.standard_normal((n, K_G)))
    return HilbertSchmidtOp(lam, left, right, Space("H", K_H), Space("G", K_G))

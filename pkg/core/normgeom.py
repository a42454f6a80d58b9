"""
Norm geometry: weighted p-norms, their duality mappings, and the two graph
transformations used throughout the analyses.

    Phi_sigma(x, v)   = (x, v + sigma * J(x))      vertical shear, any norm
    Delta_sigma(x, v) = (v + sigma * x, x)         transvection, Euclidean only

Delta_sigma carries gph T onto gph (T + sigma I)^{-1}.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from core.errors import BadParamsError, DimensionMismatchError, UnsupportedNormError


@dataclass(frozen=True)
class NormSpec:
    """
    Weighted p-norm ||x|| = (sum_i w_i |x_i|^p)^(1/p) with 1 < p < infinity.

    Attributes:
        p: The exponent. p = 2 with unit weights is the Euclidean norm.
        weights: Positive weights, one per coordinate. An empty tuple means unit
            weights in whatever dimension the norm is applied to.
    """
    p: float = 2.0
    weights: Tuple[float, ...] = ()

    def __post_init__(self):
        p = float(self.p)
        if not np.isfinite(p) or p <= 1.0:
            raise BadParamsError(f"Norm exponent must satisfy 1 < p < inf, got {self.p!r}.")
        weights = tuple(float(w) for w in self.weights)
        if any(not np.isfinite(w) or w <= 0.0 for w in weights):
            raise BadParamsError(f"Norm weights must be positive, got {self.weights!r}.")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def euclidean(cls) -> "NormSpec":
        return cls()

    @property
    def q(self) -> float:
        """Conjugate exponent, 1/p + 1/q = 1."""
        return self.p / (self.p - 1.0)

    @property
    def is_euclidean(self) -> bool:
        return self.p == 2.0 and all(w == 1.0 for w in self.weights)

    def weights_for(self, n: int) -> np.ndarray:
        if not self.weights:
            return np.ones(n)
        if len(self.weights) != n:
            raise DimensionMismatchError(
                f"Norm has {len(self.weights)} weights but the vector has dimension {n}."
            )
        return np.asarray(self.weights, dtype=float)

    def norm(self, x) -> float:
        x = np.asarray(x, dtype=float)
        w = self.weights_for(x.size)
        return float(np.sum(w * np.abs(x) ** self.p) ** (1.0 / self.p))

    def dual_norm(self, y) -> float:
        """The (q, w^(1-q)) norm dual to this one."""
        y = np.asarray(y, dtype=float)
        w = self.weights_for(y.size)
        q = self.q
        return float(np.sum(w ** (1.0 - q) * np.abs(y) ** q) ** (1.0 / q))

    def primal_half_widths(self, radius: float, n: int) -> np.ndarray:
        """Half-widths of the smallest coordinate box containing the primal ball of `radius`."""
        return radius / self.weights_for(n) ** (1.0 / self.p)

    def dual_half_widths(self, radius: float, n: int) -> np.ndarray:
        """Half-widths of the smallest coordinate box containing the dual ball of `radius`."""
        return radius * self.weights_for(n) ** (1.0 / self.p)

    def to_dict(self) -> dict:
        return {"p": self.p, "weights": list(self.weights)}


@dataclass(frozen=True, eq=False)
class GraphPoint:
    """
    A pair (x, v) with v in T(x).

    Attributes:
        x: Primal vector.
        v: Dual vector of the same dimension.
    """
    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float)).copy()
        v = np.atleast_1d(np.asarray(self.v, dtype=float)).copy()
        if x.ndim != 1 or v.ndim != 1 or x.shape != v.shape:
            raise DimensionMismatchError(
                f"Graph point needs x and v of equal dimension, got {x.shape} and {v.shape}."
            )
        x.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "v", v)

    @property
    def dim(self) -> int:
        return self.x.size

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.v])

    def key(self, digits: int = 12) -> tuple:
        return tuple(np.round(self.as_vector(), digits) + 0.0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GraphPoint):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.v, other.v)

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"GraphPoint(x={self.x.tolist()}, v={self.v.tolist()})"

    def to_dict(self) -> dict:
        return {"x": self.x.tolist(), "v": self.v.tolist()}


def duality_map(x, spec: NormSpec) -> np.ndarray:
    """
    J(x)_i = ||x||^(2-p) * w_i * |x_i|^(p-1) * sign(x_i), and J(0) = 0.

    This is the gradient of 0.5 * ||x||^2, so <J(x), x> = ||x||^2 and
    ||J(x)||_* = ||x||.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    norm = spec.norm(x)
    if norm == 0.0:
        return np.zeros_like(x)
    w = spec.weights_for(x.size)
    return norm ** (2.0 - spec.p) * w * np.abs(x) ** (spec.p - 1.0) * np.sign(x)


def shear_vertical(pt: GraphPoint, sigma: float, spec: NormSpec) -> GraphPoint:
    """Phi_sigma: (x, v) -> (x, v + sigma J(x)). The inverse is Phi_{-sigma}."""
    return GraphPoint(pt.x, pt.v + float(sigma) * duality_map(pt.x, spec))


def _require_euclidean(spec: Optional[NormSpec], what: str):
    if spec is not None and not spec.is_euclidean:
        raise UnsupportedNormError(f"{what} is only defined for the Euclidean norm, got p={spec.p}.")


def shear_transvect(pt: GraphPoint, sigma: float, spec: Optional[NormSpec] = None) -> GraphPoint:
    """Delta_sigma: (x, v) -> (v + sigma x, x)."""
    _require_euclidean(spec, "Delta_sigma")
    return GraphPoint(pt.v + float(sigma) * pt.x, pt.x)


def inverse_shear_transvect(pt: GraphPoint, sigma: float, spec: Optional[NormSpec] = None) -> GraphPoint:
    """Delta_sigma^{-1}: (y, x) -> (x, y - sigma x)."""
    _require_euclidean(spec, "Delta_sigma inverse")
    if sigma == 0:
        raise BadParamsError("The inverse transvection needs sigma != 0.")
    return GraphPoint(pt.v, pt.x - float(sigma) * pt.v)


def in_sheared_region(pt: GraphPoint, box, sigma: float, tol: float = 0.0) -> bool:
    """Membership in Phi_sigma(U x V) = {(x, v) : x in U, v - sigma J(x) in V}."""
    return box.contains_sheared(pt, sigma, tol)

"""
Defines ValueSet, the finite description of T(x) returned by operator evaluation:
a union of explicit points and polyhedral slices, optionally clipped to a dual
norm ball.
"""

from dataclasses import dataclass
from itertools import product
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from core.normgeom import NormSpec
from operators.polyhedron import Polyhedron
from utils.rational import frac_vector, to_floats


def _ball_distance(poly: Polyhedron, center: np.ndarray, spec: NormSpec) -> float:
    """Smallest dual-norm distance from center to a polyhedron (inf when empty)."""
    nearest = poly.project_euclidean(center)
    if nearest is None:
        return np.inf
    if spec.is_euclidean:
        return float(np.linalg.norm(nearest - center))
    a, b, e, f = poly._float_rows
    constraints = []
    if a.size:
        constraints.append({"type": "ineq", "fun": lambda z: b - a @ z})
    if e.size:
        constraints.append({"type": "eq", "fun": lambda z: e @ z - f})
    result = minimize(lambda z: spec.dual_norm(z - center), nearest, method="SLSQP", constraints=constraints)
    candidate = result.x if poly.contains(result.x, 1e-8) else nearest
    return min(spec.dual_norm(candidate - center), spec.dual_norm(nearest - center))


@dataclass(frozen=True, eq=False)
class ValueSet:
    """
    A subset of R^n: explicit points united with polyhedral slices.

    Attributes:
        dim: Dimension of the value space.
        points: Finitely many explicit values.
        slices: Polyhedra in value space (exact data).
        clip: Optional (center, radius, spec) dual ball the set is intersected with.
    """
    dim: int
    points: Tuple[np.ndarray, ...] = ()
    slices: Tuple[Polyhedron, ...] = ()
    clip: Optional[Tuple[np.ndarray, float, NormSpec]] = None

    @classmethod
    def empty(cls, dim: int) -> "ValueSet":
        return cls(dim)

    @classmethod
    def of_points(cls, points: Sequence, dim: int) -> "ValueSet":
        unique = {}
        for p in points:
            p = np.atleast_1d(np.asarray(p, dtype=float))
            unique.setdefault(tuple(np.round(p, 12) + 0.0), p)
        return cls(dim, tuple(unique[k] for k in sorted(unique)))

    @classmethod
    def of_slices(cls, slices: Sequence[Polyhedron], dim: int) -> "ValueSet":
        kept, points = [], []
        for s in slices:
            if s.is_empty or s in kept:
                continue
            if s.is_bounded and len(s.vertices) == 1:
                points.append(to_floats(s.vertices[0]))
            else:
                kept.append(s)
        return cls(dim, cls.of_points(points, dim).points, tuple(kept))

    def union(self, other: "ValueSet") -> "ValueSet":
        merged = ValueSet.of_points(list(self.points) + list(other.points), self.dim)
        slices = list(self.slices) + [s for s in other.slices if s not in self.slices]
        return ValueSet(self.dim, merged.points, tuple(slices), self.clip or other.clip)

    # --- Queries ---

    def _in_clip(self, v, tol: float = 0.0) -> bool:
        if self.clip is None:
            return True
        center, radius, spec = self.clip
        return spec.dual_norm(np.asarray(v, dtype=float) - center) <= radius + tol

    @property
    def is_empty(self) -> bool:
        if self.points:
            return False
        if self.clip is None:
            return all(s.is_empty for s in self.slices)
        center, radius, spec = self.clip
        return all(_ball_distance(s, center, spec) > radius + 1e-12 for s in self.slices)

    @property
    def is_single_point(self) -> bool:
        return len(self.points) == 1 and not self.slices

    def contains(self, v, tol: float = 1e-10) -> bool:
        v = np.atleast_1d(np.asarray(v, dtype=float))
        if not self._in_clip(v, tol):
            return False
        if any(np.max(np.abs(p - v)) <= tol * (1.0 + np.max(np.abs(v))) for p in self.points):
            return True
        return any(s.contains(v, tol) for s in self.slices)

    def distance(self, v) -> float:
        """Euclidean distance from v to the unclipped set; inf when it is empty."""
        v = np.atleast_1d(np.asarray(v, dtype=float))
        best = np.inf
        for p in self.points:
            best = min(best, float(np.linalg.norm(p - v)))
        for s in self.slices:
            nearest = s.project_euclidean(v)
            if nearest is not None:
                best = min(best, float(np.linalg.norm(nearest - v)))
        return best

    # --- Transformations ---

    def clipped(self, center, radius: float, spec: NormSpec) -> "ValueSet":
        center = np.atleast_1d(np.asarray(center, dtype=float))
        points = tuple(p for p in self.points if spec.dual_norm(p - center) <= radius + 1e-12)
        slices = tuple(s for s in self.slices if _ball_distance(s, center, spec) <= radius + 1e-12)
        return ValueSet(self.dim, points, slices, (center, float(radius), spec))

    def translated(self, offset) -> "ValueSet":
        offset = np.atleast_1d(np.asarray(offset, dtype=float))
        identity = [[int(i == j) for j in range(self.dim)] for i in range(self.dim)]
        clip = None if self.clip is None else (self.clip[0] + offset, self.clip[1], self.clip[2])
        return ValueSet(
            self.dim,
            tuple(p + offset for p in self.points),
            tuple(s.transformed(identity, frac_vector(offset)) for s in self.slices),
            clip,
        )

    def scaled(self, c: float) -> "ValueSet":
        if c == 0:
            return ValueSet.empty(self.dim) if self.is_empty else ValueSet.of_points([np.zeros(self.dim)], self.dim)
        matrix = [[frac_vector([c])[0] if i == j else 0 for j in range(self.dim)] for i in range(self.dim)]
        return ValueSet(
            self.dim,
            tuple(c * p for p in self.points),
            tuple(s.transformed(matrix) for s in self.slices),
        )

    def minkowski(self, other: "ValueSet") -> "ValueSet":
        """Exact Minkowski sum of two unclipped value sets."""
        points = [p + q for p in self.points for q in other.points]
        slices = []
        for p in self.points:
            slices += [s for s in ValueSet(self.dim, (), other.slices).translated(p).slices]
        for q in other.points:
            slices += [s for s in ValueSet(self.dim, (), self.slices).translated(q).slices]
        for s in self.slices:
            for t in other.slices:
                slices.append(s.minkowski(t))
        return ValueSet(self.dim, ValueSet.of_points(points, self.dim).points, ValueSet.of_slices(slices, self.dim).slices)

    # --- Enumeration ---

    def extreme_points(self) -> List[np.ndarray]:
        out = list(self.points)
        for s in self.slices:
            out += [to_floats(v) for v in s.vertices]
        return [p for p in out if self._in_clip(p, 1e-12)]

    def sample_points(self, lo, hi, density: int) -> List[np.ndarray]:
        """Points of the (clipped) set: explicit points, clipped slice vertices, and grid points in the slices."""
        out = list(self.points)
        axes = [np.linspace(l, h, density) for l, h in zip(lo, hi)]
        for s in self.slices:
            out += [to_floats(v) for v in s.vertices_in_cube(lo, hi)]
            out += [np.asarray(c, dtype=float) for c in product(*axes) if s.contains(c, 1e-12)]
        kept = {}
        for p in out:
            if self._in_clip(p, 1e-12):
                kept.setdefault(tuple(np.round(p, 12) + 0.0), p)
        return [kept[k] for k in sorted(kept)]

    def interval(self) -> Optional[Tuple[float, float]]:
        """For n = 1: the smallest interval containing the set (None when empty)."""
        if self.dim != 1 or self.is_empty:
            return None
        lo, hi = np.inf, -np.inf
        for p in self.points:
            lo, hi = min(lo, p[0]), max(hi, p[0])
        for s in self.slices:
            vertices, rays, lineality = s.vrep
            vals = [float(v[0]) for v in vertices]
            lo, hi = min(lo, *vals), max(hi, *vals)
            if lineality or any(r[0] < 0 for r in rays):
                lo = -np.inf
            if lineality or any(r[0] > 0 for r in rays):
                hi = np.inf
        if self.clip is not None:
            center, radius, spec = self.clip
            half = spec.dual_half_widths(radius, 1)[0]
            lo, hi = max(lo, center[0] - half), min(hi, center[0] + half)
        return lo, hi

    def to_dict(self) -> dict:
        if self.is_empty:
            return {"kind": "empty"}
        out = {"kind": "set"}
        if self.points:
            out["points"] = [p.tolist() for p in self.points]
        if self.slices:
            out["slices"] = [s.to_dict() for s in self.slices]
        if self.dim == 1:
            out["interval"] = list(self.interval())
        return out

"""
Convex polyhedra with rational data.

A Polyhedron is {z : a.z <= b for (a, b) in ineqs, e.z = f for (e, f) in eqs},
each row packed as a tuple of dim + 1 Fractions. The generator form comes from
cddlib; vertices are taken orthogonal to the lineality space so that every
minimal face has one fixed representative.
"""

from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.polycone import canonical_rays
from utils.rational import (
    Vector,
    centroid,
    dot,
    frac_vector,
    h_to_v,
    invert,
    is_zero,
    mat_vec,
    orthogonal_projector,
    rank,
    rref,
    to_floats,
    to_fraction,
    v_to_h,
)

Row = Tuple  # (a_1, ..., a_dim, b)


def _clean_rows(rows: Sequence[Sequence], dim: int, equality: bool) -> Tuple[Row, ...]:
    cleaned = []
    for row in rows:
        row = frac_vector(row)
        if len(row) != dim + 1:
            raise ValueError(f"Constraint row {row} has {len(row)} entries, expected {dim + 1}.")
        if is_zero(row[:dim]):
            satisfied = row[dim] == 0 if equality else row[dim] >= 0
            if satisfied:
                continue
            # 0 <= -1 keeps the system infeasible.
            row = tuple([0] * dim + [-1])
        if row not in cleaned:
            cleaned.append(row)
    return tuple(cleaned)


@dataclass(frozen=True)
class Polyhedron:
    """
    Closed convex polyhedron in R^dim.

    Attributes:
        ineqs: Rows (a, b) meaning a.z <= b.
        eqs: Rows (e, f) meaning e.z = f.
        dim: Ambient dimension.
    """
    ineqs: Tuple[Row, ...]
    eqs: Tuple[Row, ...]
    dim: int

    @classmethod
    def build(cls, ineqs: Sequence[Sequence] = (), eqs: Sequence[Sequence] = (), dim: int = 0) -> "Polyhedron":
        infeasible_eqs = []
        clean_eqs = []
        for row in _clean_rows(eqs, dim, equality=True):
            (infeasible_eqs if is_zero(row[:dim]) else clean_eqs).append(row)
        return cls(_clean_rows(list(ineqs) + infeasible_eqs, dim, equality=False), tuple(clean_eqs), dim)

    @classmethod
    def whole(cls, dim: int) -> "Polyhedron":
        return cls((), (), dim)

    @classmethod
    def cube(cls, lo: Sequence, hi: Sequence) -> "Polyhedron":
        dim = len(lo)
        rows = []
        for i in range(dim):
            unit = [0] * dim
            unit[i] = 1
            rows.append(tuple(unit) + (to_fraction(hi[i]),))
            rows.append(tuple(-u for u in unit) + (-to_fraction(lo[i]),))
        return cls.build(rows, (), dim)

    @classmethod
    def point(cls, z: Sequence) -> "Polyhedron":
        z = frac_vector(z)
        dim = len(z)
        eqs = [tuple(int(i == j) for j in range(dim)) + (z[i],) for i in range(dim)]
        return cls.build((), eqs, dim)

    @classmethod
    def from_vrep(
        cls, vertices: Sequence[Sequence], rays: Sequence[Sequence] = (), lineality: Sequence[Sequence] = (), dim: int = 0
    ) -> "Polyhedron":
        """conv(vertices) + cone(rays) + span(lineality); empty when there are no vertices."""
        if not vertices:
            return cls.build([[0] * dim + [-1]], (), dim)
        ineqs, eqs = v_to_h(vertices, rays, lineality, dim)
        return cls.build(ineqs, eqs, dim)

    @classmethod
    def hull(cls, points: Sequence[Sequence], dim: int) -> "Polyhedron":
        return cls.from_vrep(points, (), (), dim)

    # --- V-representation ---

    @cached_property
    def vrep(self) -> Tuple[List[Vector], List[Vector], List[Vector]]:
        """(vertices, recession rays, lineality basis); vertices are minimal-face representatives."""
        return _canonical_vrep(self)

    @property
    def vertices(self) -> List[Vector]:
        return self.vrep[0]

    @property
    def is_empty(self) -> bool:
        return not self.vrep[0]

    @property
    def is_bounded(self) -> bool:
        _, rays, lineality = self.vrep
        return not rays and not lineality

    @property
    def affine_dim(self) -> int:
        """Dimension of the affine hull (-1 when empty)."""
        vertices, rays, lineality = self.vrep
        if not vertices:
            return -1
        base = vertices[0]
        directions = [tuple(a - b for a, b in zip(v, base)) for v in vertices[1:]] + list(rays) + list(lineality)
        return rank(directions, self.dim) if directions else 0

    def relint_point(self) -> Optional[Vector]:
        """A point of the relative interior: vertex barycenter plus the sum of the rays."""
        vertices, rays, _ = self.vrep
        if not vertices:
            return None
        point = centroid(vertices)
        for ray in rays:
            point = tuple(p + r for p, r in zip(point, ray))
        return point

    # --- Membership ---

    @cached_property
    def _float_rows(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        a = np.array([to_floats(r[: self.dim]) for r in self.ineqs]).reshape(len(self.ineqs), self.dim)
        b = np.array([float(r[self.dim]) for r in self.ineqs])
        e = np.array([to_floats(r[: self.dim]) for r in self.eqs]).reshape(len(self.eqs), self.dim)
        f = np.array([float(r[self.dim]) for r in self.eqs])
        return a, b, e, f

    def contains_exact(self, z: Sequence) -> bool:
        z = frac_vector(z)
        return all(dot(r[: self.dim], z) <= r[self.dim] for r in self.ineqs) and all(
            dot(r[: self.dim], z) == r[self.dim] for r in self.eqs
        )

    def contains(self, z, tol: float = 1e-10) -> bool:
        z = np.asarray(z, dtype=float)
        a, b, e, f = self._float_rows
        scale = 1.0 + float(np.max(np.abs(z), initial=0.0))
        if a.size and np.any(a @ z - b > tol * scale):
            return False
        if e.size and np.any(np.abs(e @ z - f) > tol * scale):
            return False
        return True

    def active_set(self, z: Sequence) -> frozenset:
        """Indices of inequality rows holding with equality at an exact point."""
        z = frac_vector(z)
        return frozenset(i for i, r in enumerate(self.ineqs) if dot(r[: self.dim], z) == r[self.dim])

    # --- Constructions ---

    def intersect(self, other: "Polyhedron") -> "Polyhedron":
        return Polyhedron.build(self.ineqs + other.ineqs, self.eqs + other.eqs, self.dim)

    def clip_to_cube(self, lo: Sequence, hi: Sequence) -> "Polyhedron":
        return self.intersect(Polyhedron.cube(lo, hi))

    def vertices_in_cube(self, lo: Sequence, hi: Sequence) -> List[Vector]:
        return _vertices_in_cube(self, tuple(to_fraction(v) for v in lo), tuple(to_fraction(v) for v in hi))

    def faces_in_cube(self, lo: Sequence, hi: Sequence) -> List[Tuple[Vector, frozenset]]:
        """
        One representative per face of this polyhedron that meets the cube.

        The representative of the face with active set I is the barycenter of the
        cube-clipped vertices whose active set contains I; it lies in the relative
        interior of that clipped face. Returns (point, exact active set) pairs.
        """
        vertices = self.vertices_in_cube(lo, hi)
        actives = [self.active_set(v) for v in vertices]
        candidate_sets = set()
        for active in actives:
            members = sorted(active)
            for size in range(len(members) + 1):
                candidate_sets.update(frozenset(s) for s in combinations(members, size))
        faces = {}
        for subset in sorted(candidate_sets, key=lambda s: (len(s), sorted(s))):
            members = [v for v, act in zip(vertices, actives) if subset <= act]
            if not members:
                continue
            rep = centroid(members)
            actual = self.active_set(rep)
            faces.setdefault(actual, rep)
        return [(rep, act) for act, rep in sorted(faces.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))]

    def slice(self, head: Sequence) -> "Polyhedron":
        """{w : (head, w) in P}, a polyhedron in the trailing dim - len(head) coordinates."""
        head = frac_vector(head)
        k = len(head)
        rest = self.dim - k
        ineqs = [r[k : self.dim] + (r[self.dim] - dot(r[:k], head),) for r in self.ineqs]
        eqs = [r[k : self.dim] + (r[self.dim] - dot(r[:k], head),) for r in self.eqs]
        return Polyhedron.build(ineqs, eqs, rest)

    def transformed(self, matrix: Sequence[Sequence], offset: Optional[Sequence] = None) -> "Polyhedron":
        """Image under the invertible affine map z -> matrix z + offset."""
        inverse = invert(matrix)
        if inverse is None:
            raise ValueError("transformed() needs an invertible matrix; use image() instead.")
        offset = frac_vector(offset) if offset is not None else tuple([0] * self.dim)

        def pull(row):
            a = tuple(dot(row[: self.dim], col) for col in zip(*inverse))
            return a + (row[self.dim] + dot(a, offset),)

        return Polyhedron.build([pull(r) for r in self.ineqs], [pull(r) for r in self.eqs], self.dim)

    def image(self, matrix: Sequence[Sequence]) -> "Polyhedron":
        """Image under any linear map, through the V-representation."""
        vertices, rays, lineality = self.vrep
        out_dim = len(matrix)
        return Polyhedron.from_vrep(
            [mat_vec(matrix, v) for v in vertices],
            [mat_vec(matrix, r) for r in rays],
            [mat_vec(matrix, l) for l in lineality],
            out_dim,
        )

    def minkowski(self, other: "Polyhedron") -> "Polyhedron":
        v1, r1, l1 = self.vrep
        v2, r2, l2 = other.vrep
        if not v1 or not v2:
            return Polyhedron.from_vrep([], dim=self.dim)
        sums = sorted({tuple(a + b for a, b in zip(p, q)) for p in v1 for q in v2})
        return Polyhedron.from_vrep(sums, r1 + r2, l1 + l2, self.dim)

    # --- Projection ---

    def project_euclidean(self, y) -> Optional[np.ndarray]:
        """
        Nearest point to y, by enumerating candidate active sets.

        Every candidate is the projection of y onto an affine subspace cut out by a
        subset of rows; the nearest feasible candidate is the projection.
        """
        y = np.asarray(y, dtype=float)
        if self.is_empty:
            return None
        a, b, e, f = self._float_rows
        best, best_dist = None, np.inf
        for size in range(0, min(len(b), self.dim) + 1):
            for subset in combinations(range(len(b)), size):
                rows = np.vstack([e, a[list(subset)]]) if size else e
                rhs = np.concatenate([f, b[list(subset)]]) if size else f
                if rows.size:
                    z = y - np.linalg.pinv(rows) @ (rows @ y - rhs)
                else:
                    z = y.copy()
                if not self.contains(z, 1e-9):
                    continue
                dist = float(np.linalg.norm(z - y))
                if dist < best_dist - 1e-15:
                    best, best_dist = z, dist
        return best

    @cached_property
    def _face_systems(self) -> List[Tuple[np.ndarray, np.ndarray]]:
        """(rows, rhs) cutting out the affine hull of each face of a bounded polyhedron."""
        vertices = self.vertices
        lo = [min(col) for col in zip(*vertices)]
        hi = [max(col) for col in zip(*vertices)]
        a, b, e, f = self._float_rows
        systems = []
        for _, active in self.faces_in_cube(lo, hi):
            idx = sorted(active)
            systems.append((np.vstack([e, a[idx]]), np.concatenate([f, b[idx]])))
        return systems

    def quadratic_minimum(self, hessian, gradient) -> Tuple[float, Optional[np.ndarray]]:
        """
        Global minimum of 0.5 z.H z + g.z over a bounded polyhedron, H symmetric and
        possibly indefinite. Returns (value, minimizer); (inf, None) when empty.

        The minimum is attained at a vertex or at a stationary point of the
        restriction to the affine hull of some face, so every face is visited.
        """
        if self.is_empty:
            return np.inf, None
        if not self.is_bounded:
            raise ValueError("quadratic_minimum() needs a bounded polyhedron.")
        h = np.asarray(hessian, dtype=float)
        g = np.asarray(gradient, dtype=float)
        candidates = [to_floats(v) for v in self.vertices]
        for rows, rhs in self._face_systems:
            k = rows.shape[0]
            kkt = np.block([[h, rows.T], [rows, np.zeros((k, k))]]) if k else h
            target = np.concatenate([-g, rhs])
            sol = np.linalg.lstsq(kkt, target, rcond=None)[0]
            if np.linalg.norm(kkt @ sol - target) > 1e-9 * (1.0 + np.linalg.norm(target)):
                continue
            z = sol[: self.dim]
            if self.contains(z, 1e-9):
                candidates.append(z)
        values = [float(0.5 * z @ h @ z + g @ z) for z in candidates]
        best = int(np.argmin(values))
        return values[best], candidates[best]

    def to_dict(self) -> dict:
        return {
            "ineqs": [[str(c) for c in r] for r in self.ineqs],
            "eqs": [[str(c) for c in r] for r in self.eqs],
        }


def _canonical_vrep(poly: Polyhedron):
    points, rays, lineality = h_to_v(poly.ineqs, poly.eqs, poly.dim)
    if not points:
        return [], [], []
    lineality = rref(lineality, poly.dim)
    project = orthogonal_projector(lineality, poly.dim)
    vertices = sorted({project(p) for p in points})
    return vertices, canonical_rays(rays, lineality, poly.dim), lineality


@lru_cache(maxsize=4096)
def _vertices_in_cube(poly: Polyhedron, lo: Tuple, hi: Tuple) -> List[Vector]:
    return list(poly.clip_to_cube(lo, hi).vertices)

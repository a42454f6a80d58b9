"""
Normal-cone operators N(.; C) of closed convex sets C: polyhedra (given by
inequalities and equalities) and the parabola epigraph {(a, b) : b >= a^2}.
"""

import logging
from functools import cached_property
from itertools import combinations
from typing import List, Optional, Sequence

import numpy as np

import config
from core.errors import BadParamsError, UnsupportedError
from core.normgeom import GraphPoint
from core.polycone import cone_hrep
from operators.box import Box
from operators.operator import Operator, grid_samples
from operators.polyhedron import Polyhedron
from operators.value_set import ValueSet
from utils.rational import snap_vector


class NormalConeOp(Operator):
    """
    N(x; C) for the polyhedron C = {x : A x <= b, E x = f}.

    The graph is the union over faces F_I of C (I the exact active set of F_I's
    relative interior) of F_I x (cone(A_I^T) + span(E^T)), one exact piece per face.
    """

    kind = "normal_cone"

    def __init__(self, ineqs: Sequence[Sequence] = (), eqs: Sequence[Sequence] = (), dim: int = 1, name: Optional[str] = None):
        super().__init__(dim, name)
        try:
            self.set = Polyhedron.build(ineqs, eqs, dim)
        except (ValueError, TypeError, ZeroDivisionError) as e:
            raise BadParamsError(f"Bad set data for '{self.name}': {e}") from e
        if self.set.is_empty:
            raise BadParamsError(f"The set of normal-cone operator '{self.name}' is empty.")

    @classmethod
    def halfline(cls, name: Optional[str] = None) -> "NormalConeOp":
        """N(.; [0, inf)) on R."""
        return cls(ineqs=[[-1, 0]], dim=1, name=name)

    @classmethod
    def box(cls, lower: Sequence[float], upper: Sequence[float], name: Optional[str] = None) -> "NormalConeOp":
        poly = Polyhedron.cube(lower, upper)
        return cls(ineqs=poly.ineqs, dim=len(lower), name=name)

    def _normal_cone_slice(self, active: Sequence[int]) -> Polyhedron:
        n = self.dim
        gens = [r[:n] for i, r in enumerate(self.set.ineqs) if i in active]
        lin = [r[:n] for r in self.set.eqs]
        ineqs, eqs = cone_hrep(gens, lin, n)
        return Polyhedron.build([a + (0,) for a in ineqs], [e + (0,) for e in eqs], n)

    @cached_property
    def pieces(self) -> List[Polyhedron]:
        n = self.dim
        rows = self.set.ineqs
        pieces = []
        for size in range(len(rows) + 1):
            for subset in combinations(range(len(rows)), size):
                face = self.set.intersect(Polyhedron.build((), [rows[i] for i in subset], n))
                point = face.relint_point()
                if point is None or self.set.active_set(point) != frozenset(subset):
                    continue
                cone = self._normal_cone_slice(subset)
                lifted_ineqs = [r[:n] + tuple([0] * n) + (r[n],) for r in face.ineqs]
                lifted_ineqs += [tuple([0] * n) + r[:n] + (r[n],) for r in cone.ineqs]
                lifted_eqs = [r[:n] + tuple([0] * n) + (r[n],) for r in face.eqs]
                lifted_eqs += [tuple([0] * n) + r[:n] + (r[n],) for r in cone.eqs]
                pieces.append(Polyhedron.build(lifted_ineqs, lifted_eqs, 2 * n))
        logging.debug("Normal cone '%s' has %d face pieces.", self.name, len(pieces))
        return pieces

    def values_at(self, x, tol: float = config.MEMBERSHIP_TOL) -> ValueSet:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if not self.set.contains(x, tol):
            return ValueSet.empty(self.dim)
        a, b, _, _ = self.set._float_rows
        scale = tol * (1.0 + float(np.max(np.abs(x))))
        active = [i for i in range(len(b)) if abs(a[i] @ x - b[i]) <= scale]
        return ValueSet.of_slices([self._normal_cone_slice(active)], self.dim)

    def polyhedral_pieces(self) -> List[Polyhedron]:
        return list(self.pieces)

    def describe(self) -> dict:
        return {**super().describe(), "set": self.set.to_dict()}


class ParabolaNormalCone(Operator):
    """
    N(.; Omega) for Omega = {(a, b) : b >= a^2} in R^2: {0} inside, the ray
    spanned by (2a, -1) at a boundary point (a, a^2), EMPTY outside.
    """

    kind = "normal_cone_parabola"

    def __init__(self, name: Optional[str] = None):
        super().__init__(2, name)

    @staticmethod
    def gap(x) -> float:
        """b - a^2: positive inside, zero on the boundary."""
        return float(x[1] - x[0] ** 2)

    def in_set(self, x, tol: float = config.MEMBERSHIP_TOL) -> bool:
        return self.gap(np.asarray(x, dtype=float)) >= -tol

    def boundary_ray(self, a) -> Polyhedron:
        """{t (2a, -1) : t >= 0} as the slice v1 + 2a v2 = 0, v2 <= 0."""
        (a,) = snap_vector([a], config.MEMBERSHIP_TOL)
        return Polyhedron.build([[0, 1, 0]], [[1, 2 * a, 0]], 2)

    def values_at(self, x, tol: float = config.MEMBERSHIP_TOL) -> ValueSet:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        g = self.gap(x)
        if g < -tol:
            return ValueSet.empty(2)
        if g > tol:
            return ValueSet.of_points([np.zeros(2)], 2)
        return ValueSet.of_slices([self.boundary_ray(x[0])], 2)

    def polyhedral_pieces(self) -> List[Polyhedron]:
        raise UnsupportedError("The normal cone of the parabola set has a curved graph.")

    def boundary_point(self, a) -> np.ndarray:
        return np.array([a, a * a], dtype=float)

    def _graph_points(self, box: Box, density: int) -> List[GraphPoint]:
        points = grid_samples(self, box, density)
        lo, hi = box.x_bounds()
        vlo, vhi = box.v_bounds()
        for a in sorted(set(np.linspace(lo[0], hi[0], 2 * density - 1)) | {float(box.x_center[0])}):
            x = self.boundary_point(a)
            if not box.contains_x(x):
                continue
            for v in self.evaluate(x, box).sample_points(vlo, vhi, density):
                points.append(GraphPoint(x, v))
        return points

    def describe(self) -> dict:
        return {**super().describe(), "set": "b >= a^2"}

"""
Lazy composite operators: sums, inverses, sigma*J shifts, scalar multiples and
graphical localizations, plus the sum-rule qualification report.

Composites evaluate through their parts. Where every part has an exact
polyhedral graph (and, for shifts, the norm is Euclidean), the composite graph
is also produced exactly, piece by piece.
"""

import logging
from fractions import Fraction
from typing import List, Optional

import numpy as np

import config
from core.errors import BadParamsError, DimensionMismatchError, UnsupportedError
from core.normgeom import GraphPoint, NormSpec, duality_map
from operators.box import Box
from operators.normal_cone import ParabolaNormalCone
from operators.operator import Operator
from operators.polyhedral import domain_of, interior_is_empty
from operators.polyhedron import Polyhedron
from operators.sampled import SampledOp
from operators.value_set import ValueSet
from utils.rational import frac_vector, snap_vector, to_fraction


def _identity(n: int):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _block(top_left, top_right, bottom_left, bottom_right):
    top = [a + b for a, b in zip(top_left, top_right)]
    bottom = [a + b for a, b in zip(bottom_left, bottom_right)]
    return top + bottom


def _require_unlocalized(*ops: Operator):
    for op in ops:
        if op.localization_boxes():
            raise UnsupportedError(f"'{op.name}' is localized; its composite graph is evaluated pointwise only.")


class SumOp(Operator):
    """(A + B)(x) = A(x) + B(x), Minkowski sum of the value sets."""

    kind = "sum"

    def __init__(self, first: Operator, second: Operator, name: Optional[str] = None):
        if first.dim != second.dim:
            raise DimensionMismatchError(f"Cannot add operators of dimensions {first.dim} and {second.dim}.")
        super().__init__(first.dim, name)
        self.first = first
        self.second = second

    def values_at(self, x, tol: float = config.MEMBERSHIP_TOL) -> ValueSet:
        a = self.first.values_at(x, tol)
        if a.is_empty:
            return ValueSet.empty(self.dim)
        b = self.second.values_at(x, tol)
        if b.is_empty:
            return ValueSet.empty(self.dim)
        return a.minkowski(b)

    def polyhedral_pieces(self) -> List[Polyhedron]:
        _require_unlocalized(self.first, self.second)
        first, second = self.first.exact_pieces(), self.second.exact_pieces()
        if first is not None and second is not None:
            pieces = [_sum_piece(p, q, self.dim) for p in first for q in second]
            return [p for p in pieces if not p.is_empty]
        if isinstance(self.first, ParabolaNormalCone) and second is not None:
            return _parabola_sum_pieces(self.first, second)
        if isinstance(self.second, ParabolaNormalCone) and first is not None:
            return _parabola_sum_pieces(self.second, first)
        raise UnsupportedError(f"Sum '{self.name}' has no exact polyhedral graph.")

    def describe(self) -> dict:
        return {**super().describe(), "first": self.first.name, "second": self.second.name}


def _sum_piece(p: Polyhedron, q: Polyhedron, n: int) -> Polyhedron:
    """{(x, v1 + v2) : (x, v1) in p, (x, v2) in q}, through the lifted polyhedron in (x, v1, v2)."""
    zeros = (0,) * n

    def lift(row, slot):
        a_x, a_v, rhs = tuple(row[:n]), tuple(row[n : 2 * n]), row[2 * n]
        return a_x + (a_v + zeros if slot == 0 else zeros + a_v) + (rhs,)

    lifted = Polyhedron.build(
        [lift(r, 0) for r in p.ineqs] + [lift(r, 1) for r in q.ineqs],
        [lift(r, 0) for r in p.eqs] + [lift(r, 1) for r in q.eqs],
        3 * n,
    )
    eye, zero = _identity(n), [[0] * n for _ in range(n)]
    projection = [row_x + row_0 + row_00 for row_x, row_0, row_00 in zip(eye, zero, zero)]
    projection += [row_0 + row_a + row_b for row_0, row_a, row_b in zip(zero, eye, eye)]
    return lifted.image(projection)


def _line_parametrization(domain: Polyhedron):
    """(point, direction, t_low, t_high) of a one-dimensional polyhedron."""
    vertices, rays, lineality = domain.vrep
    if lineality:
        return vertices[0], lineality[0], None, None
    if rays:
        return vertices[0], rays[0], Fraction(0), None
    start, end = vertices[0], vertices[-1]
    return start, tuple(b - a for a, b in zip(start, end)), Fraction(0), Fraction(1)


def _parabola_meet(domain: Polyhedron) -> Optional[tuple]:
    """
    The single point of domain n {b >= a^2}, None when they do not meet.

    Raises UNSUPPORTED when the intersection is larger than a point.
    """
    if domain.is_empty:
        return None
    k = domain.affine_dim
    if k == 0:
        p = domain.vertices[0]
        return p if p[1] >= p[0] ** 2 else None
    if k > 1:
        raise UnsupportedError("A two-dimensional domain meets the parabola set in a curved region.")
    p, d, t_low, t_high = _line_parametrization(domain)
    # b(t) - a(t)^2 >= 0  <=>  A t^2 + B t - C <= 0
    big_a = d[0] ** 2
    big_b = 2 * p[0] * d[0] - d[1]
    big_c = p[1] - p[0] ** 2
    if big_a == 0:
        raise UnsupportedError("A vertical line meets the parabola set in a half-line.")
    disc = big_b**2 + 4 * big_a * big_c
    if disc < 0:
        return None
    if disc > 0:
        raise UnsupportedError("The domain crosses the parabola set along a segment.")
    t = -big_b / (2 * big_a)
    if (t_low is not None and t < t_low) or (t_high is not None and t > t_high):
        return None
    return tuple(pi + t * di for pi, di in zip(p, d))


def _parabola_sum_pieces(parabola: ParabolaNormalCone, other: List[Polyhedron]) -> List[Polyhedron]:
    """Exact pieces of N(.; parabola set) + S when dom S touches the set in single points."""
    n = 2
    pieces = []
    for q in other:
        x0 = _parabola_meet(domain_of(q, n))
        if x0 is None:
            continue
        values = ValueSet.of_slices([q.slice(x0)], n)
        x0_float = np.array([float(c) for c in x0])
        if parabola.gap(x0_float) > 0:
            total = values
        else:
            a = x0[0]
            ray = Polyhedron.build([[0, 1, 0]], [[1, 2 * a, 0]], n)
            total = values.minkowski(ValueSet(n, (), (ray,)))
        slices = list(total.slices) + [Polyhedron.point(frac_vector(v)) for v in total.points]
        for s in slices:
            eqs = [tuple(int(i == j) for j in range(2 * n)) + (x0[i],) for i in range(n)]
            eqs += [(0,) * n + r[:n] + (r[n],) for r in s.eqs]
            ineqs = [(0,) * n + r[:n] + (r[n],) for r in s.ineqs]
            pieces.append(Polyhedron.build(ineqs, eqs, 2 * n))
    logging.debug("Parabola sum resolved into %d exact pieces.", len(pieces))
    return pieces


class InverseOp(Operator):
    """gph A^{-1} = {(v, x) : (x, v) in gph A}."""

    kind = "inverse"

    def __init__(self, base: Operator, name: Optional[str] = None):
        super().__init__(base.dim, name)
        self.base = base

    def values_at(self, x, tol: float = config.MEMBERSHIP_TOL) -> ValueSet:
        if isinstance(self.base, InverseOp):
            return self.base.base.values_at(x, tol)
        if isinstance(self.base, SampledOp):
            return SampledOp(self.base.graph.mapped(lambda p: GraphPoint(p.v, p.x))).values_at(x, tol)
        pieces = self.polyhedral_pieces()
        head = snap_vector(np.atleast_1d(np.asarray(x, dtype=float)), tol)
        return ValueSet.of_slices([p.slice(head) for p in pieces], self.dim)

    def polyhedral_pieces(self) -> List[Polyhedron]:
        _require_unlocalized(self.base)
        n = self.dim
        zero = [[0] * n for _ in range(n)]
        swap = _block(zero, _identity(n), _identity(n), zero)
        return [p.transformed(swap) for p in self.base.polyhedral_pieces()]

    def describe(self) -> dict:
        return {**super().describe(), "base": self.base.name}


class ShiftOp(Operator):
    """(A + sigma J)(x) = A(x) + sigma J(x); its graph is the vertical shear of gph A."""

    kind = "shift"

    def __init__(self, base: Operator, sigma: float, spec: Optional[NormSpec] = None, name: Optional[str] = None):
        super().__init__(base.dim, name)
        self.base = base
        self.sigma = float(sigma)
        self.spec = spec or NormSpec()

    def values_at(self, x, tol: float = config.MEMBERSHIP_TOL) -> ValueSet:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return self.base.values_at(x, tol).translated(self.sigma * duality_map(x, self.spec))

    def polyhedral_pieces(self) -> List[Polyhedron]:
        if not self.spec.is_euclidean:
            raise UnsupportedError("A sigma*J shift has a polyhedral graph only under the Euclidean norm.")
        _require_unlocalized(self.base)
        n = self.dim
        sigma = to_fraction(self.sigma)
        shear = _block(
            _identity(n),
            [[0] * n for _ in range(n)],
            [[sigma * c for c in row] for row in _identity(n)],
            _identity(n),
        )
        return [p.transformed(shear) for p in self.base.polyhedral_pieces()]

    def describe(self) -> dict:
        return {**super().describe(), "base": self.base.name, "sigma": self.sigma}


class ScaleOp(Operator):
    """(c A)(x) = c A(x)."""

    kind = "scale"

    def __init__(self, base: Operator, factor: float, name: Optional[str] = None):
        super().__init__(base.dim, name)
        self.base = base
        self.factor = float(factor)

    def values_at(self, x, tol: float = config.MEMBERSHIP_TOL) -> ValueSet:
        return self.base.values_at(x, tol).scaled(self.factor)

    def polyhedral_pieces(self) -> List[Polyhedron]:
        _require_unlocalized(self.base)
        n = self.dim
        c = to_fraction(self.factor)
        matrix = _block(
            _identity(n),
            [[0] * n for _ in range(n)],
            [[0] * n for _ in range(n)],
            [[c * v for v in row] for row in _identity(n)],
        )
        if c == 0:
            return [p.image(matrix) for p in self.base.polyhedral_pieces()]
        return [p.transformed(matrix) for p in self.base.polyhedral_pieces()]

    def describe(self) -> dict:
        return {**super().describe(), "base": self.base.name, "factor": self.factor}


class LocalizedOp(Operator):
    """gph = gph A n (U x V)."""

    kind = "localize"

    def __init__(self, base: Operator, box: Box, name: Optional[str] = None):
        if box.dim != base.dim:
            raise DimensionMismatchError(f"Box of dimension {box.dim} cannot localize an operator on R^{base.dim}.")
        super().__init__(base.dim, name)
        self.base = base
        self.box = box

    def values_at(self, x, tol: float = config.MEMBERSHIP_TOL) -> ValueSet:
        if not self.box.contains_x(x, tol):
            return ValueSet.empty(self.dim)
        return self.base.values_at(x, tol).clipped(self.box.v_center, self.box.v_radius, self.box.spec)

    def polyhedral_pieces(self) -> List[Polyhedron]:
        return self.base.polyhedral_pieces()

    def localization_boxes(self) -> List[Box]:
        return [self.box] + self.base.localization_boxes()

    def describe(self) -> dict:
        return {**super().describe(), "base": self.base.name, "box": self.box.to_dict()}


# --- Factories ---


def op_sum(a: Operator, b: Operator, name: Optional[str] = None) -> SumOp:
    return SumOp(a, b, name)


def op_inverse(a: Operator, name: Optional[str] = None) -> InverseOp:
    return InverseOp(a, name)


def op_shift_J(a: Operator, sigma: float, spec: Optional[NormSpec] = None, name: Optional[str] = None) -> ShiftOp:
    return ShiftOp(a, sigma, spec, name)


def op_scale(a: Operator, c: float, name: Optional[str] = None) -> ScaleOp:
    return ScaleOp(a, c, name)


def op_localize(a: Operator, box: Box, name: Optional[str] = None) -> LocalizedOp:
    return LocalizedOp(a, box, name)


# --- Qualification report ---


def _interior_empty(op: Operator) -> Optional[bool]:
    if isinstance(op, ParabolaNormalCone):
        return False
    pieces = op.exact_pieces()
    if pieces is None or op.localization_boxes():
        return None
    return interior_is_empty(pieces, op.dim)


def _is_interior_point(op: Operator, x: np.ndarray, step: float) -> bool:
    offsets = [np.zeros(op.dim)]
    for i in range(op.dim):
        for sign in (-1.0, 1.0):
            e = np.zeros(op.dim)
            e[i] = sign * step
            offsets.append(e)
    return all(op.in_domain(x + e) for e in offsets)


def _meets_interior(outer: Operator, inner: Operator, inner_empty: Optional[bool], grid, step) -> dict:
    if inner_empty:
        return {"holds": False, "method": "exact"}
    for x in grid:
        if outer.in_domain(x) and _is_interior_point(inner, x, step):
            return {"holds": True, "method": "sampled", "witness": x.tolist()}
    return {"holds": False, "method": "sampled"}


def qualification_report(op: SumOp, box: Box, density: Optional[int] = None) -> dict:
    """
    Sum-rule qualification for op = T1 + T2: whether dom T1 meets int(dom T2), or
    dom T2 meets int(dom T1), near the box. An empty interior is certified exactly
    when a part has an exact graph; intersections are otherwise searched on the
    primal grid.
    """
    if not isinstance(op, SumOp):
        raise BadParamsError(f"Qualification reports need a sum operator, got '{op.kind}'.")
    density = config.DEFAULT_DENSITY if density is None else density
    grid = box.x_grid(2 * density - 1)
    step = box.x_radius / (2.0 * density)
    first_empty = _interior_empty(op.first)
    second_empty = _interior_empty(op.second)
    forward = _meets_interior(op.first, op.second, second_empty, grid, step)
    backward = _meets_interior(op.second, op.first, first_empty, grid, step)
    report = {
        "first": op.first.name,
        "second": op.second.name,
        "int_dom_first_empty": first_empty,
        "int_dom_second_empty": second_empty,
        "dom_first_meets_int_dom_second": forward,
        "dom_second_meets_int_dom_first": backward,
        "holds": forward["holds"] or backward["holds"],
    }
    logging.info("Qualification for %s: holds=%s", op.name, report["holds"])
    return report

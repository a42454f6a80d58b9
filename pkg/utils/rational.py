"""
Exact conversions for polyhedral data.

Graph data is kept in `fractions.Fraction`. Conversion between inequality and
generator form goes through cddlib in rational mode, and the small exact matrix
operations (echelon forms, ranks, inverses) through flint's fmpq_mat.
"""

from fractions import Fraction
from numbers import Rational
from typing import List, Optional, Sequence, Tuple

import cdd
import numpy as np
from flint import fmpq, fmpq_mat

Vector = Tuple[Fraction, ...]

NUMBER_TYPE = "fraction"


def to_fraction(value) -> Fraction:
    """Converts ints, floats, numpy scalars and strings such as '1/2' to an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("Booleans are not numbers here.")
    if isinstance(value, np.integer):
        return Fraction(int(value))
    if isinstance(value, Rational):
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, (float, np.floating)):
        if not np.isfinite(value):
            raise ValueError(f"Non-finite value {value!r} cannot be made exact.")
        # Shortest round-trip decimal, so 0.1 becomes 1/10 rather than its binary expansion.
        return Fraction(repr(float(value)))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"Cannot convert {type(value).__name__} to Fraction.")


def frac_vector(values) -> Vector:
    return tuple(to_fraction(v) for v in values)


def to_floats(values) -> np.ndarray:
    return np.array([float(v) for v in values], dtype=float)


def dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def is_zero(a: Sequence[Fraction]) -> bool:
    return all(x == 0 for x in a)


def mat_vec(matrix: Sequence[Sequence[Fraction]], vec: Sequence[Fraction]) -> Vector:
    return tuple(dot(row, vec) for row in matrix)


def normalize_direction(vec: Sequence[Fraction]) -> Vector:
    """Scales a nonzero vector so that its first nonzero entry has absolute value 1."""
    for x in vec:
        if x != 0:
            return tuple(v / abs(x) for v in vec)
    return tuple(vec)


def centroid(points: Sequence[Sequence[Fraction]]) -> Vector:
    count = len(points)
    return tuple(sum(col, Fraction(0)) / count for col in zip(*points))


def snap_vector(values, tol: float, max_denominator: int = 10**6) -> Vector:
    """Exact vector, with each entry replaced by a nearby small-denominator rational when one lies within tol."""
    out = []
    for value in values:
        exact = to_fraction(value)
        approx = exact.limit_denominator(max_denominator)
        out.append(approx if abs(float(approx - exact)) <= tol * (1.0 + abs(float(exact))) else exact)
    return tuple(out)


# --- flint matrices ---


def _to_flint(rows: Sequence[Sequence], ncols: int) -> fmpq_mat:
    entries = [fmpq(c.numerator, c.denominator) for row in rows for c in frac_vector(row)]
    return fmpq_mat(len(rows), ncols, entries)


def _from_flint(matrix: fmpq_mat) -> List[Vector]:
    return [
        tuple(Fraction(int(matrix[i, j].p), int(matrix[i, j].q)) for j in range(matrix.ncols()))
        for i in range(matrix.nrows())
    ]


def rref(rows: Sequence[Sequence], ncols: int) -> List[Vector]:
    """Nonzero rows of the reduced row echelon form."""
    if not rows:
        return []
    reduced, rank_ = _to_flint(rows, ncols).rref()
    return _from_flint(reduced)[:rank_]


def rank(rows: Sequence[Sequence], ncols: int) -> int:
    if not rows:
        return 0
    return int(_to_flint(rows, ncols).rank())


def invert(matrix: Sequence[Sequence]) -> Optional[List[Vector]]:
    """Exact inverse of a square matrix, or None when it is singular."""
    try:
        return _from_flint(_to_flint(matrix, len(matrix)).inv())
    except ZeroDivisionError:
        return None


def orthogonal_projector(basis: Sequence[Sequence[Fraction]], dim: int):
    """Returns a function projecting onto the orthogonal complement of span(basis)."""
    if not basis:
        return lambda y: tuple(frac_vector(y))
    b = _to_flint(rref(basis, dim), dim)
    identity = fmpq_mat(dim, dim, [int(i == j) for i in range(dim) for j in range(dim)])
    projector = _from_flint(identity - b.transpose() * (b * b.transpose()).inv() * b)
    return lambda y: mat_vec(projector, frac_vector(y))


# --- cdd conversions ---


def _cdd_matrix(linear_rows: List[list], rows: List[list], rep_type) -> "cdd.Matrix":
    if linear_rows:
        mat = cdd.Matrix(linear_rows, linear=True, number_type=NUMBER_TYPE)
        if rows:
            mat.extend(rows, linear=False)
    else:
        mat = cdd.Matrix(rows, number_type=NUMBER_TYPE)
    mat.rep_type = rep_type
    return mat


def h_to_v(ineqs: Sequence[Sequence], eqs: Sequence[Sequence], dim: int) -> Tuple[List[Vector], List[Vector], List[Vector]]:
    """
    Generators of {z : a.z <= b for (a, b) in ineqs, e.z = f for (e, f) in eqs}.

    Rows are packed as dim + 1 numbers (a_1, ..., a_dim, b). Returns (points,
    rays, lineality); points is empty exactly when the set is empty.
    """
    # cdd reads a row [b, c] as b + c.z >= 0.
    def cdd_row(row):
        row = frac_vector(row)
        return [row[dim]] + [-c for c in row[:dim]]

    rows = [cdd_row(r) for r in ineqs]
    linear_rows = [cdd_row(r) for r in eqs]
    if not rows and not linear_rows:
        rows = [[1] + [0] * dim]
    generators = cdd.Polyhedron(_cdd_matrix(linear_rows, rows, cdd.RepType.INEQUALITY)).get_generators()
    points, rays, lineality = [], [], []
    for i in range(generators.row_size):
        row = frac_vector(generators[i])
        if i in generators.lin_set:
            lineality.append(row[1:])
        elif row[0] == 0:
            rays.append(row[1:])
        else:
            points.append(tuple(c / row[0] for c in row[1:]))
    return points, rays, lineality


def v_to_h(
    points: Sequence[Sequence], rays: Sequence[Sequence], lineality: Sequence[Sequence], dim: int
) -> Tuple[List[Vector], List[Vector]]:
    """
    Inequality form of conv(points) + cone(rays) + span(lineality), points nonempty.

    Returns (ineqs, eqs) as rows (a_1, ..., a_dim, b) meaning a.z <= b and a.z = b.
    """
    rows = [[1] + list(frac_vector(p)) for p in points] + [[0] + list(frac_vector(r)) for r in rays]
    linear_rows = [[0] + list(frac_vector(l)) for l in lineality]
    inequalities = cdd.Polyhedron(_cdd_matrix(linear_rows, rows, cdd.RepType.GENERATOR)).get_inequalities()
    ineqs, eqs = [], []
    for i in range(inequalities.row_size):
        row = frac_vector(inequalities[i])
        if is_zero(row[1:]):
            continue
        packed = tuple(-c for c in row[1:]) + (row[0],)
        (eqs if i in inequalities.lin_set else ineqs).append(packed)
    return ineqs, eqs

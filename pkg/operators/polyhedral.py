"""Operators whose graph is a finite union of convex polyhedra with rational data."""

import logging
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

import config
from core.errors import BadParamsError, DimensionMismatchError
from operators.operator import Operator
from operators.polyhedron import Polyhedron
from operators.value_set import ValueSet
from utils.rational import frac_vector, snap_vector


class PolyhedralOp(Operator):
    """
    gph T = P_1 u ... u P_k, each P_i a nonempty polyhedron in R^{2n} with
    coordinates ordered (x, v).
    """

    kind = "polyhedral"

    def __init__(self, pieces: Sequence[Polyhedron], dim: int, name: Optional[str] = None):
        super().__init__(dim, name)
        kept = []
        for i, piece in enumerate(pieces):
            if piece.dim != 2 * dim:
                raise DimensionMismatchError(
                    f"Piece {i} of '{self.name}' lives in R^{piece.dim}, expected R^{2 * dim}."
                )
            if piece.is_empty:
                raise BadParamsError(f"Piece {i} of '{self.name}' is empty.")
            if piece not in kept:
                kept.append(piece)
        if not kept:
            raise BadParamsError(f"Polyhedral operator '{self.name}' needs at least one piece.")
        self.pieces = tuple(kept)

    @classmethod
    def from_data(cls, pieces: Sequence[Dict[str, Any]], dim: int, name: Optional[str] = None) -> "PolyhedralOp":
        """Builds from [{"ineqs": [[a..., b], ...], "eqs": [[e..., f], ...]}, ...]; numbers may be strings like "1/2"."""
        built = []
        for i, data in enumerate(pieces):
            if not isinstance(data, dict):
                raise BadParamsError(f"Piece {i} must be an object with 'ineqs' and/or 'eqs'.")
            try:
                built.append(Polyhedron.build(data.get("ineqs", []), data.get("eqs", []), 2 * dim))
            except (ValueError, TypeError, ZeroDivisionError) as e:
                raise BadParamsError(f"Piece {i}: {e}") from e
        return cls(built, dim, name)

    @classmethod
    def affine(cls, matrix: Sequence[Sequence], offset: Optional[Sequence] = None, name: Optional[str] = None) -> "PolyhedralOp":
        """The single-valued map x -> matrix x + offset as the piece v - matrix x = offset."""
        matrix = [frac_vector(row) for row in matrix]
        n = len(matrix)
        if any(len(row) != n for row in matrix):
            raise BadParamsError(f"Matrix must be square, got rows of lengths {[len(r) for r in matrix]}.")
        offset = frac_vector(offset) if offset is not None else tuple([0] * n)
        eqs = []
        for i in range(n):
            row = [-m for m in matrix[i]] + [int(i == j) for j in range(n)] + [offset[i]]
            eqs.append(row)
        return cls([Polyhedron.build((), eqs, 2 * n)], n, name)

    def values_at(self, x, tol: float = config.MEMBERSHIP_TOL) -> ValueSet:
        head = snap_vector(np.atleast_1d(np.asarray(x, dtype=float)), tol)
        return ValueSet.of_slices([p.slice(head) for p in self.pieces], self.dim)

    def polyhedral_pieces(self) -> List[Polyhedron]:
        return list(self.pieces)

    def describe(self) -> dict:
        return {**super().describe(), "pieces": [p.to_dict() for p in self.pieces]}


def domain_of(piece: Polyhedron, n: int) -> Polyhedron:
    """Projection of a graph piece onto its x coordinates."""
    projection = [[int(i == j) for j in range(2 * n)] for i in range(n)]
    return piece.image(projection)


def interior_is_empty(pieces: Sequence[Polyhedron], n: int) -> bool:
    """int(dom T) is empty exactly when every piece projects to a lower-dimensional set."""
    dims = [domain_of(p, n).affine_dim for p in pieces]
    logging.debug("Domain dimensions of %d pieces: %s", len(pieces), dims)
    return all(d < n for d in dims)

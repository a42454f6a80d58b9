"""Single-valued continuously differentiable operators F : R^n -> R^n."""

from typing import Callable, List, Optional, Sequence

import numpy as np

import config
from core.errors import BadParamsError, UnsupportedError
from operators.operator import Operator
from operators.polyhedral import PolyhedralOp
from operators.polyhedron import Polyhedron
from operators.value_set import ValueSet


class SmoothMap(Operator):
    """
    T(x) = {F(x)} for a C^1 map with a known Jacobian.

    Attributes:
        func: x -> F(x).
        jacobian: x -> DF(x), an n x n array.
        affine: (matrix, offset) when F is affine, which makes the graph exactly polyhedral.
    """

    kind = "smooth"

    def __init__(
        self,
        func: Callable[[np.ndarray], np.ndarray],
        jacobian: Callable[[np.ndarray], np.ndarray],
        dim: int,
        name: Optional[str] = None,
        affine=None,
    ):
        super().__init__(dim, name)
        self.func = func
        self.jacobian = jacobian
        self.affine = affine
        self.coefficients = {}

    @classmethod
    def from_coefficients(
        cls,
        dim: int,
        matrix: Optional[Sequence[Sequence[float]]] = None,
        offset: Optional[Sequence[float]] = None,
        cubic: Optional[Sequence[float]] = None,
        name: Optional[str] = None,
    ) -> "SmoothMap":
        """F(x) = matrix x + offset + cubic * x**3 (componentwise cube)."""
        m = np.zeros((dim, dim)) if matrix is None else np.asarray(matrix, dtype=float)
        c = np.zeros(dim) if offset is None else np.asarray(offset, dtype=float)
        k = np.zeros(dim) if cubic is None else np.asarray(cubic, dtype=float)
        if m.shape != (dim, dim) or c.shape != (dim,) or k.shape != (dim,):
            raise BadParamsError(
                f"Smooth map coefficients do not fit dimension {dim}: matrix {m.shape}, offset {c.shape}, cubic {k.shape}."
            )
        affine = (matrix if matrix is not None else m.tolist(), list(c)) if not np.any(k) else None
        op = cls(
            lambda x: m @ x + c + k * x**3,
            lambda x: m + np.diag(3.0 * k * x**2),
            dim,
            name,
            affine,
        )
        op.coefficients = {"matrix": m.tolist(), "offset": c.tolist(), "cubic": k.tolist()}
        return op

    def value(self, x) -> np.ndarray:
        return np.asarray(self.func(np.atleast_1d(np.asarray(x, dtype=float))), dtype=float)

    def jacobian_at(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.asarray(self.jacobian(x), dtype=float).reshape(self.dim, self.dim)

    def values_at(self, x, tol: float = config.MEMBERSHIP_TOL) -> ValueSet:
        return ValueSet.of_points([self.value(x)], self.dim)

    def polyhedral_pieces(self) -> List[Polyhedron]:
        if self.affine is None:
            raise UnsupportedError(f"Smooth map '{self.name}' is not affine; its graph is not polyhedral.")
        matrix, offset = self.affine
        return PolyhedralOp.affine(matrix, offset).polyhedral_pieces()

    def describe(self) -> dict:
        return {**super().describe(), **self.coefficients}

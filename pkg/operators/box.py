"""
Defines Box, the neighborhood U x V used by every local analysis: a closed
primal ball around x_center times a closed dual ball around v_center.
"""

from dataclasses import dataclass, field
from itertools import product
from typing import List, Optional, Tuple

import numpy as np

from core.errors import BadParamsError, DimensionMismatchError
from core.normgeom import GraphPoint, NormSpec, duality_map


@dataclass(frozen=True, eq=False)
class Box:
    """
    Product of norm balls U x V in R^n x R^n.

    Attributes:
        x_center: Center of the primal ball U.
        x_radius: Radius of U in the primal norm of `spec`.
        v_center: Center of the dual ball V.
        v_radius: Radius of V in the dual norm of `spec`.
        spec: The norm both radii refer to.
    """
    x_center: np.ndarray
    x_radius: float
    v_center: np.ndarray
    v_radius: float
    spec: NormSpec = field(default_factory=NormSpec)

    def __post_init__(self):
        xc = np.atleast_1d(np.asarray(self.x_center, dtype=float)).copy()
        vc = np.atleast_1d(np.asarray(self.v_center, dtype=float)).copy()
        if xc.shape != vc.shape or xc.ndim != 1:
            raise DimensionMismatchError(f"Box centers differ in shape: {xc.shape} vs {vc.shape}.")
        if not (self.x_radius > 0 and self.v_radius > 0):
            raise BadParamsError(
                f"Box radii must be positive, got x_radius={self.x_radius}, v_radius={self.v_radius}."
            )
        xc.flags.writeable = False
        vc.flags.writeable = False
        object.__setattr__(self, "x_center", xc)
        object.__setattr__(self, "v_center", vc)
        object.__setattr__(self, "x_radius", float(self.x_radius))
        object.__setattr__(self, "v_radius", float(self.v_radius))

    @classmethod
    def around(
        cls, pt: GraphPoint, x_radius: float, v_radius: Optional[float] = None, spec: Optional[NormSpec] = None
    ) -> "Box":
        """A box centered at a graph point; the v-radius defaults to the x-radius."""
        return cls(pt.x, x_radius, pt.v, x_radius if v_radius is None else v_radius, spec or NormSpec())

    @property
    def dim(self) -> int:
        return self.x_center.size

    @property
    def center(self) -> GraphPoint:
        return GraphPoint(self.x_center, self.v_center)

    @property
    def diameter(self) -> float:
        return 2.0 * max(self.x_radius, self.v_radius)

    # --- Membership ---

    def contains_x(self, x, tol: float = 0.0) -> bool:
        return self.spec.norm(np.asarray(x, dtype=float) - self.x_center) <= self.x_radius + tol

    def contains_v(self, v, tol: float = 0.0) -> bool:
        return self.spec.dual_norm(np.asarray(v, dtype=float) - self.v_center) <= self.v_radius + tol

    def contains(self, pt: GraphPoint, tol: float = 0.0) -> bool:
        return self.contains_x(pt.x, tol) and self.contains_v(pt.v, tol)

    def contains_sheared(self, pt: GraphPoint, sigma: float, tol: float = 0.0) -> bool:
        """Membership in Phi_sigma(U x V) = {(x, v) : x in U, v - sigma J(x) in V}."""
        return self.contains_x(pt.x, tol) and self.contains_v(
            pt.v - float(sigma) * duality_map(pt.x, self.spec), tol
        )

    def interior_x(self, x, margin: float = 1e-9) -> bool:
        return self.spec.norm(np.asarray(x, dtype=float) - self.x_center) < self.x_radius - margin

    def interior(self, pt: GraphPoint, margin: float = 1e-9) -> bool:
        return self.interior_x(pt.x, margin) and (
            self.spec.dual_norm(pt.v - self.v_center) < self.v_radius - margin
        )

    # --- Coordinate cubes ---

    def x_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        half = self.spec.primal_half_widths(self.x_radius, self.dim)
        return self.x_center - half, self.x_center + half

    def v_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        half = self.spec.dual_half_widths(self.v_radius, self.dim)
        return self.v_center - half, self.v_center + half

    def cube_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        """Bounds of the smallest coordinate cube in R^{2n} containing U x V."""
        xl, xh = self.x_bounds()
        vl, vh = self.v_bounds()
        return np.concatenate([xl, vl]), np.concatenate([xh, vh])

    # --- Grids ---

    def x_grid(self, density: int) -> List[np.ndarray]:
        """Regular grid points of the primal cube that lie in U; the center is always included."""
        lo, hi = self.x_bounds()
        return _ball_grid(lo, hi, density, self.x_center, self.contains_x)

    def v_grid(self, density: int) -> List[np.ndarray]:
        lo, hi = self.v_bounds()
        return _ball_grid(lo, hi, density, self.v_center, self.contains_v)

    # --- Derived boxes ---

    def scaled(self, factor: float) -> "Box":
        return Box(self.x_center, self.x_radius * factor, self.v_center, self.v_radius * factor, self.spec)

    def recentered(self, pt: GraphPoint) -> "Box":
        return Box(pt.x, self.x_radius, pt.v, self.v_radius, self.spec)

    def to_dict(self) -> dict:
        return {
            "x_center": self.x_center.tolist(),
            "x_radius": self.x_radius,
            "v_center": self.v_center.tolist(),
            "v_radius": self.v_radius,
        }

    def __repr__(self) -> str:
        return (
            f"Box(x_center={self.x_center.tolist()}, x_radius={self.x_radius}, "
            f"v_center={self.v_center.tolist()}, v_radius={self.v_radius})"
        )


def _ball_grid(lo, hi, density, center, inside) -> List[np.ndarray]:
    if density < 2:
        raise BadParamsError(f"Grid density must be at least 2, got {density}.")
    axes = [np.linspace(l, h, density) for l, h in zip(lo, hi)]
    points = [np.asarray(center, dtype=float)]
    seen = {tuple(np.round(center, 12) + 0.0)}
    for coords in product(*axes):
        p = np.asarray(coords, dtype=float)
        key = tuple(np.round(p, 12) + 0.0)
        if key in seen or not inside(p, 1e-12):
            continue
        seen.add(key)
        points.append(p)
    return points

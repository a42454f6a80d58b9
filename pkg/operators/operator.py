"""Defines the abstract Operator interface shared by every operator variant."""

import logging
from abc import ABC, abstractmethod
from itertools import combinations
from typing import List, Optional

import numpy as np

import config
from core.errors import BadParamsError, EmptyGraphError, UnsupportedError
from core.normgeom import GraphPoint
from operators.box import Box
from operators.polyhedron import Polyhedron
from operators.value_set import ValueSet
from utils.rational import to_floats


class Operator(ABC):
    """
    A set-valued operator T : R^n => R^n, described through its graph.

    Subclasses provide `values_at` (the unclipped value set T(x)); everything a
    local analysis needs, evaluation inside a Box and graph sampling, is built on
    it. Operators are immutable once constructed.
    """

    kind = "operator"

    def __init__(self, dim: int, name: Optional[str] = None):
        if dim < 1:
            raise BadParamsError(f"Operator dimension must be positive, got {dim}.")
        self._dim = dim
        self.name = name or self.kind

    @property
    def dim(self) -> int:
        return self._dim

    @abstractmethod
    def values_at(self, x, tol: float = config.MEMBERSHIP_TOL) -> ValueSet:
        """T(x) without any clipping."""
        pass

    def evaluate(self, x, box: Box, tol: Optional[float] = None) -> ValueSet:
        """T(x) intersected with the dual ball of `box`; EMPTY when x is outside its primal ball."""
        tol = config.MEMBERSHIP_TOL if tol is None else tol
        if not box.contains_x(x, tol):
            return ValueSet.empty(self.dim)
        return self.values_at(x, tol).clipped(box.v_center, box.v_radius, box.spec)

    def contains(self, pt: GraphPoint, tol: Optional[float] = None) -> bool:
        tol = config.MEMBERSHIP_TOL if tol is None else tol
        if any(not b.contains(pt, tol) for b in self.localization_boxes()):
            return False
        return self.values_at(pt.x, tol).contains(pt.v, tol)

    def in_domain(self, x, tol: Optional[float] = None) -> bool:
        tol = config.MEMBERSHIP_TOL if tol is None else tol
        return not self.values_at(x, tol).is_empty

    def polyhedral_pieces(self) -> List[Polyhedron]:
        """Exact graph pieces in R^{2n}; callers intersect them with `localization_boxes()`."""
        raise UnsupportedError(f"Operator '{self.name}' has no exact polyhedral graph.")

    def exact_pieces(self) -> Optional[List[Polyhedron]]:
        try:
            return self.polyhedral_pieces()
        except UnsupportedError:
            return None

    def localization_boxes(self) -> List[Box]:
        return []

    # --- Sampling ---

    def sample_graph(self, box: Box, density: Optional[int] = None):
        """
        Deterministic sample of gph T within `box`.

        Exact operators contribute every piece vertex and one point per face inside
        the cube around the box, plus slices over the primal grid; other operators
        are sampled on the primal grid only.
        """
        from operators.sampled import SampledGraph

        density = config.DEFAULT_DENSITY if density is None else density
        if density < 2:
            raise BadParamsError(f"Sampling density must be at least 2, got {density}.")
        points = [p for p in self._graph_points(box, density) if box.contains(p, 1e-12)]
        for loc in self.localization_boxes():
            points = [p for p in points if loc.contains(p, 1e-12)]
        if not points:
            raise EmptyGraphError(f"Graph of '{self.name}' does not meet {box!r}.", box=box.to_dict())
        graph = SampledGraph.of(points)
        logging.debug("Sampled %d graph points of %s at density %d.", len(graph), self.name, density)
        return graph

    def _graph_points(self, box: Box, density: int) -> List[GraphPoint]:
        pieces = self.exact_pieces()
        if pieces is not None:
            return piece_samples(pieces, box, density)
        return grid_samples(self, box, density)

    def describe(self) -> dict:
        return {"kind": self.kind, "name": self.name, "dim": self.dim}

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r}, dim={self.dim})"


def grid_samples(op: Operator, box: Box, density: int) -> List[GraphPoint]:
    """Evaluates the operator on the primal grid and samples each value set."""
    vlo, vhi = box.v_bounds()
    points = []
    for x in box.x_grid(density):
        values = op.evaluate(x, box)
        for v in values.sample_points(vlo, vhi, density):
            points.append(GraphPoint(x, v))
    return points


def piece_samples(pieces: List[Polyhedron], box: Box, density: int) -> List[GraphPoint]:
    """Vertices, face representatives, vertex midpoints and primal-grid slices of each piece."""
    n = box.dim
    lo, hi = box.cube_bounds()
    vlo, vhi = box.v_bounds()
    grid = box.x_grid(density)
    vectors = []
    for piece in pieces:
        vertices = piece.vertices_in_cube(lo, hi)
        vectors += [to_floats(v) for v in vertices]
        vectors += [to_floats(rep) for rep, _ in piece.faces_in_cube(lo, hi)]
        for a, b in combinations(vertices, 2):
            vectors.append((to_floats(a) + to_floats(b)) / 2.0)
        for x in grid:
            slice_values = ValueSet.of_slices([piece.slice(x)], n)
            vectors += [np.concatenate([x, v]) for v in slice_values.sample_points(vlo, vhi, density)]
    return [GraphPoint(z[:n], z[n:]) for z in vectors]

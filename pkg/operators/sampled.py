"""Finite graphs: SampledGraph (a set of graph points) and SampledOp, the operator it defines."""

from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

import config
from core.errors import BadParamsError, DimensionMismatchError
from core.normgeom import GraphPoint
from operators.box import Box
from operators.operator import Operator
from operators.polyhedron import Polyhedron
from operators.value_set import ValueSet


@dataclass(frozen=True)
class SampledGraph:
    """A finite, deduplicated and sorted set of graph points."""
    points: Tuple[GraphPoint, ...]

    @classmethod
    def of(cls, points: Sequence[GraphPoint], digits: int = config.DEDUP_DIGITS) -> "SampledGraph":
        unique = {}
        for p in points:
            unique.setdefault(p.key(digits), p)
        ordered = tuple(unique[k] for k in sorted(unique))
        if len({p.dim for p in ordered}) > 1:
            raise DimensionMismatchError("Sampled graph mixes points of different dimensions.")
        return cls(ordered)

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[Sequence[float], Sequence[float]]]) -> "SampledGraph":
        return cls.of([GraphPoint(x, v) for x, v in pairs])

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[GraphPoint]:
        return iter(self.points)

    @property
    def dim(self) -> int:
        return self.points[0].dim if self.points else 0

    @property
    def xs(self) -> np.ndarray:
        return np.array([p.x for p in self.points]).reshape(len(self.points), self.dim)

    @property
    def vs(self) -> np.ndarray:
        return np.array([p.v for p in self.points]).reshape(len(self.points), self.dim)

    def filtered(self, box: Box, tol: float = 1e-12) -> "SampledGraph":
        return SampledGraph.of([p for p in self.points if box.contains(p, tol)])

    def mapped(self, fn: Callable[[GraphPoint], GraphPoint]) -> "SampledGraph":
        return SampledGraph.of([fn(p) for p in self.points])

    def union(self, other: "SampledGraph") -> "SampledGraph":
        return SampledGraph.of(list(self.points) + list(other.points))

    def to_dict(self) -> dict:
        return {"points": [p.to_dict() for p in self.points]}


class SampledOp(Operator):
    """The operator whose graph is exactly a given finite set of points."""

    kind = "sampled"

    def __init__(self, graph: SampledGraph, name: Optional[str] = None):
        if not len(graph):
            raise BadParamsError("A sampled operator needs at least one graph point.")
        super().__init__(graph.dim, name)
        self.graph = graph

    def values_at(self, x, tol: float = config.MEMBERSHIP_TOL) -> ValueSet:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        scale = tol * (1.0 + float(np.max(np.abs(x))))
        return ValueSet.of_points([p.v for p in self.graph if np.max(np.abs(p.x - x)) <= scale], self.dim)

    def polyhedral_pieces(self) -> List[Polyhedron]:
        return [Polyhedron.point(list(p.x) + list(p.v)) for p in self.graph]

    def _graph_points(self, box: Box, density: int) -> List[GraphPoint]:
        return list(self.graph.points)

    def describe(self) -> dict:
        return {**super().describe(), "points": len(self.graph)}

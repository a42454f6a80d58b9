"""
Polyhedral cones in exact arithmetic.

A PolyCone is stored in generator form (extreme rays plus a lineality basis).
Conversion to and from the inequality form goes through cddlib in rational mode.
Every PolyCone is canonical: rays are orthogonal to the lineality space, scaled
so the first nonzero entry is +-1, and sorted; the lineality basis is in reduced
row echelon form. Two PolyCones describing the same set therefore compare equal.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import List, Sequence, Tuple

from utils.rational import (
    Vector,
    dot,
    frac_vector,
    h_to_v,
    is_zero,
    mat_vec,
    normalize_direction,
    orthogonal_projector,
    rref,
    to_floats,
    v_to_h,
)


def _neg(vec: Vector) -> Vector:
    return tuple(-x for x in vec)


def _unique_directions(vectors: Sequence[Vector]) -> List[Vector]:
    seen = set()
    for vec in vectors:
        if not is_zero(vec):
            seen.add(normalize_direction(vec))
    return sorted(seen)


def canonical_rays(rays: Sequence[Vector], lineality: Sequence[Vector], dim: int) -> List[Vector]:
    """Rays projected onto the orthogonal complement of the lineality space, normalized and sorted."""
    project = orthogonal_projector(list(lineality), dim)
    return _unique_directions([project(r) for r in rays])


def cone_vrep(ineqs: Sequence[Sequence], eqs: Sequence[Sequence], dim: int) -> Tuple[List[Vector], List[Vector]]:
    """
    Generators of {y : a.y <= 0 for a in ineqs, e.y = 0 for e in eqs}.

    Returns (extreme rays, lineality basis); the rays are orthogonal to the lineality space.
    """
    _, rays, lineality = h_to_v(
        [frac_vector(a) + (0,) for a in ineqs], [frac_vector(e) + (0,) for e in eqs], dim
    )
    lineality = rref(lineality, dim)
    return canonical_rays(rays, lineality, dim), lineality


def cone_hrep(generators: Sequence[Sequence], lineality: Sequence[Sequence], dim: int) -> Tuple[List[Vector], List[Vector]]:
    """
    Inequality form of cone(generators) + span(lineality).

    Returns (ineqs, eqs) meaning {y : a.y <= 0 for a in ineqs, e.y = 0 for e in eqs}.
    """
    ineqs, eqs = v_to_h([(0,) * dim], generators, lineality, dim)
    return _unique_directions([a[:dim] for a in ineqs]), [e[:dim] for e in eqs]


def _canonical_lineality(lineality: Sequence[Vector], dim: int) -> Tuple[Vector, ...]:
    return tuple(rref(lineality, dim))


@dataclass(frozen=True)
class PolyCone:
    """
    Closed polyhedral cone cone(generators) + span(lineality) in R^dim.

    Attributes:
        generators: Extreme rays (canonical, orthogonal to the lineality space).
        lineality: Basis of the lineality space in reduced row echelon form.
        dim: Ambient dimension.
    """
    generators: Tuple[Vector, ...]
    lineality: Tuple[Vector, ...]
    dim: int

    @classmethod
    def from_hrep(cls, ineqs: Sequence[Sequence], eqs: Sequence[Sequence], dim: int) -> "PolyCone":
        rays, lineality = cone_vrep(ineqs, eqs, dim)
        return cls(tuple(rays), _canonical_lineality(lineality, dim), dim)

    @classmethod
    def generated_by(cls, generators: Sequence[Sequence], lineality: Sequence[Sequence], dim: int) -> "PolyCone":
        """Builds the canonical cone from any (possibly redundant) generating set."""
        ineqs, eqs = cone_hrep(generators, lineality, dim)
        return cls.from_hrep(ineqs, eqs, dim)

    @classmethod
    def zero(cls, dim: int) -> "PolyCone":
        return cls((), (), dim)

    @classmethod
    def whole(cls, dim: int) -> "PolyCone":
        return cls.from_hrep([], [], dim)

    @cached_property
    def hrep(self) -> Tuple[List[Vector], List[Vector]]:
        return cone_hrep(self.generators, self.lineality, self.dim)

    @property
    def is_zero(self) -> bool:
        return not self.generators and not self.lineality

    @property
    def is_subspace(self) -> bool:
        return not self.generators

    def spanning_vectors(self) -> List[Vector]:
        """Generators, lineality vectors and their negatives: the cone is their nonnegative hull."""
        return list(self.generators) + [v for l in self.lineality for v in (l, _neg(l))]

    def contains(self, y: Sequence) -> bool:
        y = frac_vector(y)
        ineqs, eqs = self.hrep
        return all(dot(a, y) <= 0 for a in ineqs) and all(dot(e, y) == 0 for e in eqs)

    def polar(self) -> "PolyCone":
        return PolyCone.from_hrep(self.generators, self.lineality, self.dim)

    def intersect(self, other: "PolyCone") -> "PolyCone":
        a_ineqs, a_eqs = self.hrep
        b_ineqs, b_eqs = other.hrep
        return PolyCone.from_hrep(a_ineqs + b_ineqs, a_eqs + b_eqs, self.dim)

    def map_linear(self, matrix: Sequence[Sequence[Fraction]]) -> "PolyCone":
        """Image under y -> matrix @ y."""
        out_dim = len(matrix)
        gens = [mat_vec(matrix, g) for g in self.generators]
        lin = [mat_vec(matrix, l) for l in self.lineality]
        return PolyCone.generated_by(gens, lin, out_dim)

    def to_dict(self) -> dict:
        return {
            "generators": [to_floats(g).tolist() for g in self.generators],
            "lineality": [to_floats(l).tolist() for l in self.lineality],
        }


@dataclass(frozen=True)
class ConeUnion:
    """A nonempty finite union of PolyCones; membership means membership in any member."""
    cones: Tuple[PolyCone, ...] = field(default_factory=tuple)

    def __post_init__(self):
        unique = []
        for cone in self.cones:
            if cone not in unique:
                unique.append(cone)
        if not unique:
            raise ValueError("A ConeUnion needs at least one cone.")
        if len({c.dim for c in unique}) != 1:
            raise ValueError("All cones of a ConeUnion must share one ambient dimension.")
        object.__setattr__(self, "cones", tuple(unique))

    @property
    def dim(self) -> int:
        return self.cones[0].dim

    def contains(self, y: Sequence) -> bool:
        return any(cone.contains(y) for cone in self.cones)

    def covers_generators_of(self, cone: PolyCone) -> bool:
        """Every spanning vector of `cone` lies in some member."""
        return all(self.contains(vec) for vec in cone.spanning_vectors())

    def same_as(self, other: "ConeUnion") -> bool:
        return set(self.cones) == set(other.cones)

    def map_linear(self, matrix) -> "ConeUnion":
        return ConeUnion(tuple(c.map_linear(matrix) for c in self.cones))

    def to_dict(self) -> dict:
        return {"cones": [c.to_dict() for c in self.cones]}

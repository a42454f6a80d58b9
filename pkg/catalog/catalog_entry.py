"""
This module defines CatalogEntry, a named operator recipe together with the
ground truth expected of it at a few reference graph points.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from core.normgeom import GraphPoint
from operators.box import Box

# PAPER: stated in the published worked examples the catalog reproduces.
# DERIVED: worked out by hand for this entry. TRIVIAL: immediate from the definitions.
PROVENANCE_TAGS = ("PAPER", "DERIVED", "TRIVIAL")


@dataclass(frozen=True)
class Expectation:
    """An expected status with where it comes from."""
    status: str
    provenance: str
    note: str

    def to_dict(self) -> dict:
        return {"status": self.status, "provenance": self.provenance, "note": self.note}


@dataclass
class Reference:
    """
    A reference graph point with the box analyses are run in and the expected outcomes.

    Attributes:
        point: The graph point (x_bar, v_bar).
        x_radius: Primal radius of the analysis box.
        v_radius: Dual radius of the analysis box.
        expectations: Analysis name -> expected status with its provenance tag and note.
        moduli: Expected moduli at this point (e.g. sigma_hat, r_hat, lipschitz).
    """
    point: GraphPoint
    x_radius: float = 1.0
    v_radius: float = 1.0
    expectations: Dict[str, Expectation] = field(default_factory=dict)
    moduli: Dict[str, float] = field(default_factory=dict)

    @property
    def expected(self) -> Dict[str, str]:
        """Analysis name -> expected status ("PASS", "FAIL", "UNSUPPORTED", ...)."""
        return {name: e.status for name, e in self.expectations.items()}

    def box(self) -> Box:
        return Box.around(self.point, self.x_radius, self.v_radius)

    def to_dict(self) -> dict:
        return {
            "point": self.point.to_dict(),
            "x_radius": self.x_radius,
            "v_radius": self.v_radius,
            "expected": {name: e.to_dict() for name, e in self.expectations.items()},
            "moduli": dict(self.moduli),
        }


@dataclass
class CatalogEntry:
    """
    A catalog operator.

    Attributes:
        name: Stable identifier referenced by scene files (e.g. "normal_cone_halfline").
        kind: Builder used to construct the operator (see catalog.builtins.BUILDERS).
        params: Constructor parameters passed to the builder.
        description: One-line description.
        provenance: Where the expectations come from (derivation notes).
        references: Reference points with expected verdicts.
    """
    name: str
    kind: str
    params: Dict[str, Any] = field(default_factory=dict)
    description: str = ""
    provenance: str = ""
    references: List[Reference] = field(default_factory=list)

    def expected_at(self, index: int, analysis: str) -> Optional[str]:
        return self.references[index].expected.get(analysis)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "params": dict(self.params),
            "description": self.description,
            "provenance": self.provenance,
            "references": [r.to_dict() for r in self.references],
        }

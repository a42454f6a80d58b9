"""
Defines the Verdict returned by every analysis, and the Witness a FAIL carries.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple

from core.normgeom import GraphPoint


class Status(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass
class Witness:
    """
    Evidence for a FAIL.

    Attributes:
        kind: What the witness certifies, e.g. "pair", "extension", "isc", "resolvent", "coderivative".
        points: Graph points involved (a violating pair, an extension point, ...).
        data: Numbers needed to re-check the defining inequality.
    """
    kind: str
    points: Tuple[GraphPoint, ...] = ()
    data: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "points": [p.to_dict() for p in self.points], **self.data}


@dataclass
class Verdict:
    """
    Outcome of an analysis.

    FAIL always carries a witness. INCONCLUSIVE always records the resolution at
    which the search stopped. PASS from a sampling-based probe is labelled with
    the resolution it holds at.
    """
    status: Status
    operation: str = ""
    witness: Optional[Witness] = None
    moduli: Dict[str, Optional[float]] = field(default_factory=dict)
    resolution: Dict[str, Any] = field(default_factory=dict)
    tol: Optional[float] = None
    details: Dict[str, Any] = field(default_factory=dict)
    message: str = ""

    def __post_init__(self):
        self.status = Status(self.status)
        if self.status is Status.FAIL and self.witness is None:
            raise ValueError(f"FAIL verdict for '{self.operation}' has no witness.")
        if self.status is Status.INCONCLUSIVE and not self.resolution:
            raise ValueError(f"INCONCLUSIVE verdict for '{self.operation}' has no resolution.")

    @property
    def passed(self) -> bool:
        return self.status is Status.PASS

    @property
    def failed(self) -> bool:
        return self.status is Status.FAIL

    def sub_verdicts(self) -> Dict[str, "Verdict"]:
        return {k: v for k, v in self.details.items() if isinstance(v, Verdict)}

    def to_dict(self) -> dict:
        out = {"operation": self.operation, "status": self.status.value}
        if self.witness is not None:
            out["witness"] = self.witness.to_dict()
        if self.moduli:
            out["moduli"] = dict(self.moduli)
        if self.resolution:
            out["resolution"] = dict(self.resolution)
        if self.tol is not None:
            out["tol"] = self.tol
        if self.message:
            out["message"] = self.message
        if self.details:
            out["details"] = {
                k: (v.to_dict() if isinstance(v, Verdict) else v) for k, v in self.details.items()
            }
        return out


def combine(operation: str, parts: Dict[str, Verdict], **kwargs) -> Verdict:
    """
    Conjunction of sub-verdicts: FAIL if any part fails (its witness is carried),
    INCONCLUSIVE if any part is inconclusive, PASS otherwise.
    """
    failing = next((v for v in parts.values() if v.failed), None)
    if failing is not None:
        return Verdict(Status.FAIL, operation, witness=failing.witness, details=dict(parts), **kwargs)
    if any(v.status is Status.INCONCLUSIVE for v in parts.values()):
        resolution = {k: v.resolution for k, v in parts.items() if v.status is Status.INCONCLUSIVE}
        return Verdict(Status.INCONCLUSIVE, operation, resolution=resolution, details=dict(parts), **kwargs)
    return Verdict(Status.PASS, operation, details=dict(parts), **kwargs)

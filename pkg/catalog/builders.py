"""Builders turning catalog (kind, params) pairs into operators."""

from typing import Any, Callable, Dict, Optional

from core.errors import BadParamsError, MonolabError
from operators.composite import op_sum
from operators.normal_cone import NormalConeOp, ParabolaNormalCone
from operators.operator import Operator
from operators.polyhedral import PolyhedralOp
from operators.smooth import SmoothMap

Resolver = Callable[[str], Operator]
Builder = Callable[[Dict[str, Any], str, Optional[Resolver]], Operator]


def _require(params: Dict[str, Any], *keys: str):
    missing = [k for k in keys if k not in params]
    if missing:
        raise BadParamsError(f"Missing parameters: {', '.join(missing)}.")


def _linear(params, name, resolve=None) -> Operator:
    _require(params, "matrix")
    matrix = params["matrix"]
    return SmoothMap.from_coefficients(len(matrix), matrix, params.get("offset"), name=name)


def _smooth(params, name, resolve=None) -> Operator:
    _require(params, "dim")
    return SmoothMap.from_coefficients(
        int(params["dim"]), params.get("matrix"), params.get("offset"), params.get("cubic"), name=name
    )


def _polyhedral(params, name, resolve=None) -> Operator:
    _require(params, "dim", "pieces")
    return PolyhedralOp.from_data(params["pieces"], int(params["dim"]), name)


def _normal_cone(params, name, resolve=None) -> Operator:
    _require(params, "dim")
    return NormalConeOp(params.get("ineqs", []), params.get("eqs", []), int(params["dim"]), name)


def _normal_cone_box(params, name, resolve=None) -> Operator:
    _require(params, "lower", "upper")
    return NormalConeOp.box(params["lower"], params["upper"], name)


def _parabola(params, name, resolve=None) -> Operator:
    return ParabolaNormalCone(name)


def _truncated_identity(params, name, resolve=None) -> Operator:
    """The identity on R with the open gap (a, b) removed from its domain."""
    a, b = params.get("gap", [0, 0.5])
    if not a < b:
        raise BadParamsError(f"The gap must satisfy a < b, got ({a}, {b}).")
    pieces = [
        {"ineqs": [[1, 0, a]], "eqs": [[-1, 1, 0]]},
        {"ineqs": [[-1, 0, -b]], "eqs": [[-1, 1, 0]]},
    ]
    return PolyhedralOp.from_data(pieces, 1, name)


def _sum(params, name, resolve=None) -> Operator:
    _require(params, "first", "second")
    if resolve is None:
        raise BadParamsError("A sum entry needs a catalog to resolve its parts.")
    return op_sum(resolve(params["first"]), resolve(params["second"]), name)


BUILDERS: Dict[str, Builder] = {
    "linear": _linear,
    "smooth": _smooth,
    "polyhedral": _polyhedral,
    "normal_cone": _normal_cone,
    "normal_cone_box": _normal_cone_box,
    "normal_cone_parabola": _parabola,
    "truncated_identity": _truncated_identity,
    "sum": _sum,
}


def build_operator(kind: str, params: Dict[str, Any], name: str, resolve: Optional[Resolver] = None) -> Operator:
    if kind not in BUILDERS:
        raise BadParamsError(f"Unknown operator kind '{kind}'.")
    try:
        return BUILDERS[kind](params, name, resolve)
    except MonolabError:
        raise
    except (TypeError, ValueError) as e:
        raise BadParamsError(f"Cannot build '{name}' ({kind}): {e}") from e

"""
Scene files: a line-oriented description of a norm, a set of named operators
and a list of analysis requests.

    # comment
    [norm]
    p = 2

    [operator T1]
    catalog = "normal_cone_parabola"

    [operator T]
    sum = ["T1", "T2"]

    [analysis]
    typeA_witness_search op=T point=[[0, 0], [0, 0]] radius=1

Operator and norm lines are `key = <JSON>`. Analysis lines are an operation
name followed by `key=<JSON>` pairs; `op` and `point` are required.
"""

import json
import logging
import re
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from thefuzz import process

import config
from catalog.builders import BUILDERS, build_operator
from catalog.builtins import builtin, default_catalog
from catalog.in_memory_catalog import InMemoryCatalog
from core.errors import MonolabError, SceneError
from core.normgeom import GraphPoint, NormSpec
from operators.box import Box
from operators.composite import op_inverse, op_localize, op_scale, op_shift_J, op_sum
from operators.operator import Operator
from operators.sampled import SampledGraph, SampledOp

_SECTION = re.compile(r"^\[\s*(norm|analysis|operator\s+(\w+))\s*\]$")
_ASSIGN = re.compile(r"^(\w+)\s*=\s*(.*)$")
_PAIR = re.compile(r"(\w+)=(.*?)(?=\s+\w+=|$)")

COMPOSITE_KINDS = ("sum", "inverse", "shift", "scale", "localize")
OPERATOR_KINDS = ("catalog", "sampled") + COMPOSITE_KINDS + tuple(BUILDERS)

_BOX_KEYS = {"op", "point", "radius", "x_radius", "v_radius", "density", "label"}

# Operation -> accepted keys beyond op/point/box/density/label.
ANALYSIS_KEYS: Dict[str, set] = {
    "evaluate": set(),
    "sample_graph": set(),
    "monotone_witness": {"tol"},
    "strong_modulus": {"tol"},
    "hypo_modulus": {"growth"},
    "isc_probe": {"radii", "eps", "tol"},
    "typeA_witness_search": {"tol", "extra"},
    "monotone_extension": {"at"},
    "minty_local_probe": {"lambda"},
    "minty_sweep": {"lambdas"},
    "inverse_localization_probe": set(),
    "strong_inverse_probe": {"tol"},
    "local_max_via_resolvent": {"tol"},
    "localization_lipschitz": {"lambda", "sigma"},
    "regular_coderivative": set(),
    "limiting_coderivative": set(),
    "psd_criterion": {"sigma"},
    "psd_supremum": set(),
    "local_max_via_coderivative": {"sigma"},
    "qualification_report": set(),
}


@dataclass
class OperatorDef:
    """A named operator as written in the scene, together with the built operator."""
    name: str
    kind: str
    value: Any
    line: int
    params: Dict[str, Any] = field(default_factory=dict)
    operator: Optional[Operator] = field(default=None, repr=False, compare=False)


@dataclass
class AnalysisRequest:
    """One line of the [analysis] section."""
    operation: str
    op: str
    point: GraphPoint
    args: Dict[str, Any]
    line: int

    def box(self, spec: NormSpec) -> Box:
        radius = float(self.args.get("radius", 1.0))
        x_radius = float(self.args.get("x_radius", radius))
        v_radius = float(self.args.get("v_radius", radius))
        return Box.around(self.point, x_radius, v_radius, spec)

    @property
    def label(self) -> str:
        return str(self.args.get("label", f"{self.operation}@{self.line}"))


@dataclass
class Scene:
    norm: NormSpec = field(default_factory=NormSpec)
    operators: Dict[str, OperatorDef] = field(default_factory=dict)
    requests: List[AnalysisRequest] = field(default_factory=list)

    def operator(self, name: str) -> Operator:
        return self.operators[name].operator


# --- Parsing ---


def _json_value(raw: str, line: int, column: int) -> Any:
    try:
        return json.loads(raw)
    except json.JSONDecodeError as e:
        raise SceneError(f"Invalid JSON value {raw!r}: {e.msg}", line, column + e.colno - 1) from e


def _parse_point(value: Any, dim: Optional[int], line: int, column: int) -> GraphPoint:
    if isinstance(value, dict) and set(value) == {"x", "v"}:
        x, v = value["x"], value["v"]
    elif isinstance(value, list) and len(value) == 2:
        x, v = value
    else:
        raise SceneError("A point is written [[x...], [v...]] or {\"x\": [...], \"v\": [...]}.", line, column)
    try:
        pt = GraphPoint(x, v)
    except MonolabError as e:
        raise SceneError(str(e), line, column, code=e.code) from e
    except (TypeError, ValueError) as e:
        raise SceneError(f"Bad point {value!r}: {e}", line, column) from e
    if dim is not None and pt.dim != dim:
        raise SceneError(
            f"Point has dimension {pt.dim} but the operator has dimension {dim}.", line, column, code="DIMENSION_MISMATCH"
        )
    return pt


def _suggestion(name: str, choices) -> str:
    matches = process.extract(name, list(choices), limit=config.SUGGESTION_LIMIT)
    close = [m[0] for m in matches if m[1] >= config.SUGGESTION_MIN_SCORE]
    return f" Did you mean: {', '.join(close)}?" if close else ""


class _Parser:
    def __init__(self, catalog: Optional[InMemoryCatalog]):
        self.catalog = catalog
        self.scene = Scene()
        self.section: Optional[str] = None
        self.current: Optional[str] = None
        self.pending: Dict[str, Tuple[Dict[str, Tuple[Any, int, int]], int]] = {}

    # --- Sections ---

    def header(self, match, line: int):
        self.finish_operator()
        if match.group(1) == "norm":
            self.section = "norm"
        elif match.group(1) == "analysis":
            self.section = "analysis"
        else:
            name = match.group(2)
            if name in self.scene.operators:
                raise SceneError(f"Operator '{name}' is defined twice.", line)
            self.section = "operator"
            self.current = name
            self.pending[name] = ({}, line)

    def assignment(self, text: str, line: int, indent: int):
        match = _ASSIGN.match(text)
        if not match:
            raise SceneError("Expected 'key = value'.", line, indent + 1)
        key, raw = match.group(1), match.group(2)
        column = indent + match.start(2) + 1
        value = _json_value(raw, line, column)
        if self.section == "norm":
            self.norm_key(key, value, line, indent + 1)
        else:
            entries, _ = self.pending[self.current]
            if key in entries:
                raise SceneError(f"Key '{key}' repeated in operator '{self.current}'.", line, indent + 1)
            entries[key] = (value, line, column)

    def norm_key(self, key: str, value: Any, line: int, column: int):
        current = self.scene.norm
        try:
            if key == "p":
                self.scene.norm = NormSpec(value, current.weights)
            elif key == "weights":
                self.scene.norm = NormSpec(current.p, tuple(value or ()))
            else:
                raise SceneError(f"Unknown norm key '{key}'; expected 'p' or 'weights'.", line, column)
        except MonolabError as e:
            if isinstance(e, SceneError):
                raise
            raise SceneError(str(e), line, column, code=e.code) from e

    # --- Operators ---

    def resolve(self, name: Any, line: int, column: int) -> Operator:
        if not isinstance(name, str) or name not in self.scene.operators:
            known = list(self.scene.operators)
            raise SceneError(
                f"Unknown operator '{name}'.{_suggestion(str(name), known) if known else ''}",
                line,
                column,
                code="UNKNOWN_OPERATOR",
            )
        return self.scene.operators[name].operator

    def finish_operator(self):
        if self.current is None:
            return
        name = self.current
        entries, line = self.pending.pop(name)
        self.current = None
        params = entries.pop("params", (None, line, 1))
        if len(entries) != 1:
            raise SceneError(
                f"Operator '{name}' needs exactly one definition key out of: {', '.join(OPERATOR_KINDS)}.", line
            )
        kind, (value, key_line, column) = next(iter(entries.items()))
        if kind not in OPERATOR_KINDS:
            raise SceneError(f"Unknown operator kind '{kind}'.{_suggestion(kind, OPERATOR_KINDS)}", key_line)
        if params[0] is not None and kind != "catalog":
            raise SceneError("'params' only applies to catalog operators.", params[1], params[2])
        definition = OperatorDef(name, kind, value, line, params[0] or {})
        try:
            definition.operator = self.build(definition, key_line, column)
        except SceneError:
            raise
        except MonolabError as e:
            raise SceneError(str(e), key_line, column, code=e.code) from e
        self.check_norm(definition.operator, key_line)
        self.scene.operators[name] = definition
        logging.debug("Scene operator %s: %s", name, definition.operator)

    def build(self, d: OperatorDef, line: int, column: int) -> Operator:
        value = d.value
        if d.kind == "catalog":
            if not isinstance(value, str):
                raise SceneError("'catalog' takes a catalog name.", line, column)
            op = builtin(value, self.catalog, **d.params)
            op.name = d.name
            return op
        if d.kind == "sampled":
            if not isinstance(value, list) or not value:
                raise SceneError("'sampled' takes a list of [[x...], [v...]] points.", line, column)
            points = [_parse_point(p, None, line, column) for p in value]
            return SampledOp(SampledGraph.of(points), d.name)
        if d.kind == "sum":
            if not isinstance(value, list) or len(value) != 2:
                raise SceneError("'sum' takes two operator names.", line, column)
            return op_sum(self.resolve(value[0], line, column), self.resolve(value[1], line, column), d.name)
        if d.kind == "inverse":
            return op_inverse(self.resolve(value, line, column), d.name)
        if d.kind in ("shift", "scale", "localize"):
            if not isinstance(value, dict) or "of" not in value:
                raise SceneError(f"'{d.kind}' takes an object with an 'of' operator name.", line, column)
            base = self.resolve(value["of"], line, column)
            if d.kind == "shift":
                return op_shift_J(base, float(value.get("sigma", 1.0)), self.scene.norm, d.name)
            if d.kind == "scale":
                return op_scale(base, float(value.get("factor", 1.0)), d.name)
            pt = _parse_point(value.get("point"), base.dim, line, column)
            radius = float(value.get("radius", 1.0))
            box = Box.around(pt, float(value.get("x_radius", radius)), float(value.get("v_radius", radius)), self.scene.norm)
            return op_localize(base, box, d.name)
        if not isinstance(value, dict):
            raise SceneError(f"'{d.kind}' takes an object of constructor parameters.", line, column)
        return build_operator(d.kind, value, d.name)

    def check_norm(self, op: Operator, line: int):
        weights = self.scene.norm.weights
        if weights and len(weights) != op.dim:
            raise SceneError(
                f"The norm has {len(weights)} weights but '{op.name}' has dimension {op.dim}.",
                line,
                code="DIMENSION_MISMATCH",
            )

    # --- Analyses ---

    def analysis(self, text: str, line: int, indent: int):
        head, _, rest = text.partition(" ")
        if head not in ANALYSIS_KEYS:
            raise SceneError(f"Unknown analysis '{head}'.{_suggestion(head, ANALYSIS_KEYS)}", line, indent + 1)
        offset = indent + len(head) + 1
        args: Dict[str, Any] = {}
        columns: Dict[str, int] = {}
        pairs = list(_PAIR.finditer(rest))
        leading = rest[: pairs[0].start()] if pairs else rest
        if leading.strip():
            raise SceneError(f"Cannot read {leading.strip()!r}; expected key=value pairs.", line, offset + 1)
        for match in pairs:
            key = match.group(1)
            column = offset + match.start(2) + 1
            if key in args:
                raise SceneError(f"Key '{key}' repeated.", line, column)
            if key not in _BOX_KEYS | ANALYSIS_KEYS[head]:
                allowed = sorted(_BOX_KEYS | ANALYSIS_KEYS[head])
                raise SceneError(f"'{head}' does not take '{key}'; expected one of {allowed}.", line, column)
            raw = match.group(2).strip()
            args[key] = raw if key in ("op", "label") else _json_value(raw, line, column)
            columns[key] = column
        for required in ("op", "point"):
            if required not in args:
                raise SceneError(f"'{head}' needs {required}=...", line, indent + 1)
        op = self.resolve(args.pop("op"), line, columns["op"])
        point = _parse_point(args.pop("point"), op.dim, line, columns["point"])
        if "at" in args:
            at = args["at"]
            if not isinstance(at, list) or len(at) != op.dim:
                raise SceneError(f"'at' must be a vector of dimension {op.dim}.", line, columns["at"], code="DIMENSION_MISMATCH")
        self.scene.requests.append(AnalysisRequest(head, op.name, point, args, line))

    # --- Driver ---

    def feed(self, raw_line: str, line: int):
        stripped = raw_line.strip()
        if not stripped or stripped.startswith("#"):
            return
        indent = len(raw_line) - len(raw_line.lstrip())
        match = _SECTION.match(stripped)
        if match:
            self.header(match, line)
        elif self.section is None:
            raise SceneError("Content before the first [section].", line, indent + 1)
        elif self.section == "analysis":
            self.analysis(stripped, line, indent)
        else:
            self.assignment(stripped, line, indent)


def parse_scene(text: str, catalog: Optional[InMemoryCatalog] = None) -> Scene:
    """
    Parses scene text into a Scene with built operators.

    Raises SceneError (code PARSE_ERROR, UNKNOWN_OPERATOR, DIMENSION_MISMATCH, ...)
    at the first problem, with 1-based line and column.
    """
    parser = _Parser(catalog or default_catalog())
    for number, raw_line in enumerate(text.splitlines(), start=1):
        parser.feed(raw_line, number)
    parser.finish_operator()
    scene = parser.scene
    logging.info("Parsed scene: %d operators, %d requests.", len(scene.operators), len(scene.requests))
    return scene


# --- Formatting ---


def _dump(value: Any) -> str:
    return json.dumps(value, sort_keys=True)


def _point_text(pt: GraphPoint) -> str:
    return _dump([pt.x.tolist(), pt.v.tolist()])


def format_scene(scene: Scene) -> str:
    """Canonical text for a scene; parsing it back gives the same scene."""
    lines = ["[norm]", f"p = {_dump(scene.norm.p)}"]
    if scene.norm.weights:
        lines.append(f"weights = {_dump(list(scene.norm.weights))}")
    for d in scene.operators.values():
        lines += ["", f"[operator {d.name}]", f"{d.kind} = {_dump(d.value)}"]
        if d.params:
            lines.append(f"params = {_dump(d.params)}")
    if scene.requests:
        lines += ["", "[analysis]"]
    for r in scene.requests:
        parts = [r.operation, f"op={r.op}", f"point={_point_text(r.point)}"]
        for key in sorted(r.args):
            value = r.args[key]
            parts.append(f"{key}={value}" if key == "label" else f"{key}={_dump(value)}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"

"""
Runs the analysis requests of a scene and serializes the results as a
canonical JSON report (schema "monolab-report/1").
"""

import hashlib
import json
import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

import numpy as np

import config
from core.errors import DegenerateError, MonolabError, SolverLimitError, UnboundedError
from core.monocheck import (
    hypo_modulus,
    isc_probe,
    monotone_extension,
    monotone_witness,
    revalidate_witness,
    strong_modulus,
    typeA_witness_search,
)
from core.normgeom import GraphPoint, duality_map
from core.resolvent import (
    inverse_localization_probe,
    local_max_via_resolvent,
    localization_lipschitz,
    minty_local_probe,
    minty_sweep,
    strong_inverse_probe,
)
from core.scene import AnalysisRequest, Scene, format_scene
from core.vardiff import (
    limiting_coderivative,
    local_max_via_coderivative,
    psd_criterion,
    psd_supremum,
    regular_coderivative,
)
from core.verdict import Status, Verdict
from operators.box import Box
from operators.composite import op_shift_J, qualification_report
from operators.operator import Operator

# Errors that mean "the analysis ran out of resolution", not "the request is wrong".
_RESOLUTION_ERRORS = (SolverLimitError, UnboundedError, DegenerateError)

ERROR = "ERROR"
INTERNAL_ERROR = "INTERNAL_ERROR"


@dataclass
class Report:
    """
    Results of one scene run.

    Attributes:
        scene_hash: sha256 of the canonical scene text.
        seed: Seed used by randomized searches.
        tol: Tolerance override, if any.
        records: One dictionary per request, in declaration order.
        elapsed: Wall-clock seconds; only serialized when timing was requested.
    """
    scene_hash: str
    seed: int = 0
    tol: Optional[float] = None
    records: List[Dict[str, Any]] = field(default_factory=list)
    elapsed: Optional[float] = None

    def statuses(self) -> List[str]:
        return [r["status"] for r in self.records]

    def exit_code(self) -> int:
        """0 when every request ran to a verdict, 2 if any is inconclusive, 3 on internal errors."""
        statuses = self.statuses()
        if INTERNAL_ERROR in statuses:
            return 3
        if Status.INCONCLUSIVE.value in statuses:
            return 2
        return 0


def scene_hash(scene: Scene) -> str:
    return hashlib.sha256(format_scene(scene).encode("utf-8")).hexdigest()


class AnalysisRunner:
    """Executes analysis requests against the operators of one scene."""

    def __init__(self, scene: Scene, seed: int = 0, tol: Optional[float] = None):
        self.scene = scene
        self.spec = scene.norm
        self.seed = seed
        self.tol = tol
        # The operator a FAIL witness is re-checked against; a handler may substitute a derived one.
        self._subject: Optional[Operator] = None
        self._handlers: Dict[str, Callable[[Operator, AnalysisRequest, Box], Any]] = {
            "evaluate": self._evaluate,
            "sample_graph": self._sample_graph,
            "monotone_witness": self._monotone_witness,
            "strong_modulus": self._strong_modulus,
            "hypo_modulus": self._hypo_modulus,
            "isc_probe": self._isc_probe,
            "typeA_witness_search": self._typeA_witness_search,
            "monotone_extension": self._monotone_extension,
            "minty_local_probe": self._minty_local_probe,
            "minty_sweep": self._minty_sweep,
            "inverse_localization_probe": self._inverse_localization_probe,
            "strong_inverse_probe": self._strong_inverse_probe,
            "local_max_via_resolvent": self._local_max_via_resolvent,
            "localization_lipschitz": self._localization_lipschitz,
            "regular_coderivative": self._regular_coderivative,
            "limiting_coderivative": self._limiting_coderivative,
            "psd_criterion": self._psd_criterion,
            "psd_supremum": self._psd_supremum,
            "local_max_via_coderivative": self._local_max_via_coderivative,
            "qualification_report": self._qualification_report,
        }

    # --- Helpers ---

    def _tol(self, req: AnalysisRequest) -> Optional[float]:
        return req.args.get("tol", self.tol)

    @staticmethod
    def _density(req: AnalysisRequest, default: int) -> int:
        return int(req.args.get("density", default))

    def _graph(self, op: Operator, req: AnalysisRequest, box: Box):
        return op.sample_graph(box, self._density(req, config.DEFAULT_DENSITY))

    # --- Analysis Implementations ---

    def _evaluate(self, op, req, box):
        return {"values": op.evaluate(req.point.x, box).to_dict()}

    def _sample_graph(self, op, req, box):
        graph = self._graph(op, req, box)
        return {"count": len(graph), **graph.to_dict()}

    def _monotone_witness(self, op, req, box):
        return monotone_witness(self._graph(op, req, box), self.spec, self._tol(req))

    def _strong_modulus(self, op, req, box):
        return strong_modulus(self._graph(op, req, box), self.spec, self._tol(req))

    def _hypo_modulus(self, op, req, box):
        return {"r_hat": hypo_modulus(self._graph(op, req, box), self.spec, req.args.get("growth"))}

    def _isc_probe(self, op, req, box):
        return isc_probe(
            op,
            req.point,
            req.args.get("radii"),
            req.args.get("eps"),
            self._density(req, config.ISC_DENSITY),
            self._tol(req),
        )

    def _typeA_witness_search(self, op, req, box):
        return typeA_witness_search(
            op,
            req.point,
            box,
            self._density(req, config.DEFAULT_DENSITY),
            self._tol(req),
            seed=self.seed,
            extra_points=req.args.get("extra"),
        )

    def _monotone_extension(self, op, req, box):
        at = req.args.get("at", req.point.x.tolist())
        value = monotone_extension(self._graph(op, req, box), at, self.spec)
        return {"at": list(at), "extends": value is not None, "value": None if value is None else value.tolist()}

    def _minty_local_probe(self, op, req, box):
        verdict, probe = minty_local_probe(
            op, req.point, req.args.get("lambda"), box, self._density(req, config.PROBE_DENSITY), self.spec
        )
        verdict.details["probe"] = probe.to_dict()
        return verdict

    def _minty_sweep(self, op, req, box):
        return minty_sweep(op, req.point, box, self._density(req, config.PROBE_DENSITY), req.args.get("lambdas"))

    def _inverse_localization_probe(self, op, req, box):
        verdict, probe = inverse_localization_probe(op, req.point, box, self._density(req, config.PROBE_DENSITY))
        verdict.details["probe"] = probe.to_dict()
        return verdict

    def _strong_inverse_probe(self, op, req, box):
        return strong_inverse_probe(op, req.point, box, self._density(req, config.PROBE_DENSITY), self._tol(req))

    def _local_max_via_resolvent(self, op, req, box):
        return local_max_via_resolvent(op, req.point, box, self._density(req, config.PROBE_DENSITY), self._tol(req))

    def _localization_lipschitz(self, op, req, box):
        """
        With sigma: l_hat of (T + sigma J)^{-1} around (v_bar + sigma J(x_bar), x_bar).
        Without: l_hat of the resolvent (J + lambda T)^{-1}.
        """
        density = self._density(req, config.PROBE_DENSITY)
        if "sigma" in req.args:
            sigma = float(req.args["sigma"])
            shifted = op_shift_J(op, sigma, self.spec)
            pt = GraphPoint(req.point.x, req.point.v + sigma * duality_map(req.point.x, self.spec))
            sheared = Box(pt.x, box.x_radius, pt.v, box.v_radius + abs(sigma) * box.x_radius, self.spec)
            verdict, probe = inverse_localization_probe(shifted, pt, sheared, density)
            self._subject = shifted
        else:
            verdict, probe = minty_local_probe(op, req.point, req.args.get("lambda"), box, density, self.spec)
        if verdict.passed:
            verdict.moduli["lipschitz"] = localization_lipschitz(probe)
        verdict.details["probe"] = probe.to_dict()
        return verdict

    def _regular_coderivative(self, op, req, box):
        return {"cone": regular_coderivative(op, req.point).to_dict()}

    def _limiting_coderivative(self, op, req, box):
        return limiting_coderivative(op, req.point).to_dict()

    def _psd_criterion(self, op, req, box):
        return psd_criterion(op, box, float(req.args.get("sigma", 0.0)), self._density(req, config.DEFAULT_DENSITY))

    def _psd_supremum(self, op, req, box):
        return {"sigma_sup": psd_supremum(op, box, self._density(req, config.DEFAULT_DENSITY))}

    def _local_max_via_coderivative(self, op, req, box):
        return local_max_via_coderivative(
            op, req.point, box, self._density(req, config.DEFAULT_DENSITY), float(req.args.get("sigma", 0.0))
        )

    def _qualification_report(self, op, req, box):
        return qualification_report(op, box, self._density(req, config.DEFAULT_DENSITY))

    # --- Driver ---

    def run(self, index: int, req: AnalysisRequest) -> Dict[str, Any]:
        """Runs one request; errors become records instead of propagating."""
        op = self.scene.operator(req.op)
        record: Dict[str, Any] = {
            "index": index,
            "label": req.label,
            "line": req.line,
            "operation": req.operation,
            "operator": req.op,
            "point": req.point.to_dict(),
        }
        logging.info("Request %d (%s) on %s at %s.", index, req.operation, req.op, req.point)
        try:
            self._subject = op
            box = req.box(self.spec)
            record["box"] = box.to_dict()
            result = self._handlers[req.operation](op, req, box)
        except _RESOLUTION_ERRORS as e:
            logging.warning("Request %d is inconclusive: %s", index, e)
            record.update(status=Status.INCONCLUSIVE.value, error=e.to_dict())
            return record
        except MonolabError as e:
            logging.error("Request %d failed with %s: %s", index, e.code, e)
            record.update(status=ERROR, error=e.to_dict())
            return record
        except Exception as e:
            logging.exception("Unexpected error in request %d: %s", index, e)
            record.update(status=INTERNAL_ERROR, error={"code": INTERNAL_ERROR, "message": str(e)})
            return record

        if isinstance(result, Verdict):
            record["status"] = result.status.value
            if result.failed:
                record["revalidated"] = revalidate_witness(result, self._subject, self.spec, self._tol(req))
                if not record["revalidated"]:
                    logging.warning("Witness of request %d did not re-validate.", index)
                    record["status"] = Status.INCONCLUSIVE.value
            record["verdict"] = result.to_dict()
        else:
            record["status"] = Status.PASS.value
            record["value"] = result
        logging.info("Request %d: %s", index, record["status"])
        return record


def run_analyses(scene: Scene, seed: int = 0, tol: Optional[float] = None, timing: bool = False) -> Report:
    """Executes every request in declaration order; a failing request never stops the run."""
    start = time.perf_counter()
    runner = AnalysisRunner(scene, seed, tol)
    report = Report(scene_hash(scene), seed, tol)
    for index, req in enumerate(scene.requests):
        report.records.append(runner.run(index, req))
    if timing:
        report.elapsed = time.perf_counter() - start
    return report


# --- Serialization ---


def _plain(value: Any) -> Any:
    """Converts numpy, Fraction, Enum and dataclass-like values into JSON types."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (str, bool)) or value is None:
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating, Fraction)):
        return float(value)
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "to_dict"):
        return _plain(value.to_dict())
    raise TypeError(f"Cannot serialize {type(value).__name__} into a report.")


def _format_float(x: float) -> str:
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    text = format(x, f".{config.FLOAT_DIGITS}g")
    if "." not in text and "e" not in text:
        text += ".0"
    return text


def _encode(value: Any, indent: str = "") -> str:
    inner = indent + "  "
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {_encode(value[k], inner)}" for k in sorted(value)]
        return "{\n" + ",\n".join(items) + "\n" + indent + "}"
    if isinstance(value, list):
        if not value:
            return "[]"
        return "[\n" + ",\n".join(inner + _encode(v, inner) for v in value) + "\n" + indent + "]"
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _format_float(value)
    return json.dumps(value)


def emit_report(report: Report) -> str:
    """Canonical JSON: sorted keys, floats with 17 significant digits, two-space indent."""
    body = {
        "schema": config.REPORT_SCHEMA,
        "tool": config.TOOL_NAME,
        "version": config.TOOL_VERSION,
        "scene_sha256": report.scene_hash,
        "seed": report.seed,
        "tol": report.tol,
        "requests": report.records,
    }
    if report.elapsed is not None:
        body["wall_clock_seconds"] = report.elapsed
    return _encode(_plain(body)) + "\n"

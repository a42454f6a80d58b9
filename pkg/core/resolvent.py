"""
Resolvent solves for (c J + lambda T)^{-1} and the local probes built on them.

    c = 1: the resolvent (J + lambda T)^{-1}, the Minty route to local maximality
    c = 0: the inverse T^{-1} (lambda = 1), the route to strong local maximality

Exact operators under the Euclidean norm (or any norm when c = 0) are solved
piece by piece: substituting v = (y - c x) / lambda turns each graph piece into
a polyhedron in x. Everything else goes through a residual search.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize, root

import config
from core.errors import BadParamsError, DegenerateError, PointNotInSetError, SolverLimitError
from core.monocheck import monotone_witness, strong_modulus
from core.normgeom import GraphPoint, NormSpec, duality_map
from core.verdict import Status, Verdict, Witness, combine
from operators.box import Box
from operators.normal_cone import ParabolaNormalCone
from operators.operator import Operator
from operators.polyhedron import Polyhedron
from operators.smooth import SmoothMap
from utils.rational import frac_vector, to_floats, to_fraction


@dataclass
class LocalizationProbe:
    """
    Record of a probe of a single-valued localization of a solution map.

    Attributes:
        y_center: Image-space center (J(x_bar) + lambda v_bar, or v_bar for inverses).
        x_center: Primal center x_bar.
        lam: The lambda used (1 for inverse probes).
        radii: Image-ball radii tried, largest first.
        queries: (y, solutions) pairs of the last radius tried.
        single_valued: Every query of the accepted radius had exactly one solution.
        covers_domain: No query of the accepted radius was empty.
        leaked: Some solution touched the boundary of the primal ball.
        lipschitz: Sampled Lipschitz constant of the solution map, when defined.
    """
    y_center: np.ndarray
    x_center: np.ndarray
    lam: float
    radii: List[float] = field(default_factory=list)
    tol: float = config.SOLVER_RESIDUAL_TOL
    queries: List[Tuple[np.ndarray, List[np.ndarray]]] = field(default_factory=list)
    single_valued: bool = False
    covers_domain: bool = False
    leaked: bool = False
    lipschitz: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "y_center": np.asarray(self.y_center).tolist(),
            "x_center": np.asarray(self.x_center).tolist(),
            "lambda": self.lam,
            "radii": list(self.radii),
            "queries": len(self.queries),
            "single_valued": self.single_valued,
            "covers_domain": self.covers_domain,
            "leaked": self.leaked,
            "lipschitz": self.lipschitz,
        }


# --- Solving ---


def _dedupe(points: Sequence[np.ndarray], digits: int = 9) -> List[np.ndarray]:
    """Points closer than 10**-digits (max-norm) collapse to the first one seen."""
    kept: List[np.ndarray] = []
    for p in points:
        p = np.asarray(p, dtype=float)
        if all(np.max(np.abs(p - q)) > 10.0**-digits for q in kept):
            kept.append(p)
    return sorted(kept, key=lambda p: tuple(p))


def _value_for(x: np.ndarray, y: np.ndarray, lam: float, c: float, spec: NormSpec) -> np.ndarray:
    return (y - c * duality_map(x, spec)) / lam if c else y / lam


def _admissible(op: Operator, x, v, box: Box, tol: float) -> bool:
    pt = GraphPoint(x, v)
    return box.contains(pt, tol) and all(b.contains(pt, tol) for b in op.localization_boxes())


def _exact_candidates(piece: Polyhedron, y: np.ndarray, lam: float, c: float, boxes: List[Box], n: int):
    """Candidate solutions on one piece: vertices of the x-polyhedron clipped to the boxes, plus projections."""
    yf = frac_vector(y)
    lam_f = to_fraction(lam)
    c_f = to_fraction(c)

    def substitute(row):
        ax, av, b = row[:n], row[n : 2 * n], row[2 * n]
        coeffs = tuple(ax[i] - c_f * av[i] / lam_f for i in range(n))
        return coeffs + (b - sum(av[i] * yf[i] for i in range(n)) / lam_f,)

    q = Polyhedron.build([substitute(r) for r in piece.ineqs], [substitute(r) for r in piece.eqs], n)
    if q.is_empty:
        return []
    lo = np.full(n, -np.inf)
    hi = np.full(n, np.inf)
    for b in boxes:
        xl, xh = b.x_bounds()
        lo, hi = np.maximum(lo, xl), np.minimum(hi, xh)
        vl, vh = b.v_bounds()
        if c:
            lo, hi = np.maximum(lo, (y - lam * vh) / c), np.minimum(hi, (y - lam * vl) / c)
        elif np.any(y / lam < vl - 1e-12) or np.any(y / lam > vh + 1e-12):
            return []
    if np.any(lo > hi + 1e-12):
        return []
    clipped = q.clip_to_cube(lo, np.maximum(lo, hi))
    vertices = [to_floats(v) for v in clipped.vertices]
    candidates = list(vertices)
    if vertices:
        candidates.append(np.mean(vertices, axis=0))
    for center in [boxes[0].x_center] + ([(y - lam * boxes[0].v_center) / c] if c else []):
        p = q.project_euclidean(center)
        if p is not None:
            candidates.append(p)
    return candidates


def _solve_exact(op, pieces, y, lam, c, box, tol) -> List[np.ndarray]:
    n = op.dim
    boxes = [box] + op.localization_boxes()
    found = []
    for piece in pieces:
        for x in _exact_candidates(piece, y, lam, c, boxes, n):
            v = _value_for(x, y, lam, c, NormSpec())
            if piece.contains(np.concatenate([x, v]), 1e-9) and _admissible(op, x, v, box, 1e-9):
                found.append(x)
    return _dedupe(found)


def _solve_parabola(op: ParabolaNormalCone, y, lam, c, box) -> List[np.ndarray]:
    if c:
        # Every lambda N is N itself: the solution is the projection onto b >= a^2.
        result = minimize(
            lambda x: float(np.sum((x - y) ** 2)),
            np.array([y[0], max(y[1], y[0] ** 2)]),
            method="SLSQP",
            constraints=[{"type": "ineq", "fun": lambda x: x[1] - x[0] ** 2}],
            options={"ftol": 1e-15, "maxiter": 500},
        )
        candidates = [np.asarray(result.x, dtype=float)]
    else:
        v = y / lam
        if np.allclose(v, 0.0, atol=1e-12):
            # T^{-1}(0) is the whole set; two interior points show it is not a singleton.
            candidates = [x for x in box.x_grid(3) if op.gap(x) >= 0]
        elif v[1] < 0:
            a = v[0] / (-2.0 * v[1])
            candidates = [op.boundary_point(a)]
        else:
            candidates = []
    found = []
    for x in candidates:
        v = _value_for(x, y, lam, c, NormSpec())
        if op.contains(GraphPoint(x, v), 1e-7) and _admissible(op, x, v, box, 1e-9):
            found.append(x)
    return _dedupe(found)


def _solve_smooth(op: SmoothMap, y, lam, c, spec, box, tol) -> List[np.ndarray]:
    def equation(x):
        return c * duality_map(x, spec) + lam * op.value(x) - y

    jac = (lambda x: c * np.eye(op.dim) + lam * op.jacobian_at(x)) if spec.is_euclidean else None
    starts = sorted(box.x_grid(config.PROBE_DENSITY), key=lambda x: float(np.linalg.norm(equation(x))))
    found = []
    for x0 in starts[: config.SOLVER_MAX_CANDIDATES]:
        sol = root(equation, x0, jac=jac, method="hybr", tol=1e-14)
        x = np.asarray(sol.x, dtype=float)
        if np.linalg.norm(equation(x)) > tol:
            continue
        v = op.value(x)
        if _admissible(op, x, v, box, 1e-9):
            found.append(x)
    return _dedupe(found, 7)


def _solve_generic(op, y, lam, c, spec, box, tol) -> List[np.ndarray]:
    """Grid search on the residual, Nelder-Mead polish, and local refinement around the best cells."""
    penalty = 1e3

    def residual(x):
        values = op.values_at(x)
        if values.is_empty:
            return penalty
        return lam * min(values.distance(_value_for(x, y, lam, c, spec)), penalty)

    points = box.x_grid(config.SOLVER_GRID_DENSITY)
    lo, hi = box.x_bounds()
    step = float(np.max(hi - lo)) / (config.SOLVER_GRID_DENSITY - 1)
    best = np.inf
    for level in range(config.SOLVER_REFINE_LEVELS):
        scored = sorted(((residual(x), tuple(x)) for x in points), key=lambda s: s[0])
        scored = [s for s in scored if s[0] < penalty][: config.SOLVER_MAX_CANDIDATES]
        found = []
        for score, x0 in scored:
            result = minimize(residual, np.asarray(x0), method="Nelder-Mead",
                              options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
            x = np.asarray(result.x, dtype=float)
            r = residual(x)
            best = min(best, r, score)
            if r <= tol and _admissible(op, x, _value_for(x, y, lam, c, spec), box, 1e-9):
                found.append(x)
        if found:
            return _dedupe(found, 7)
        if not scored or best > step * (1.0 + lam):
            return []
        step /= 2.0
        offsets = [np.array(o) for o in np.ndindex(*([3] * op.dim))]
        points = [np.asarray(x0) + (o - 1) * step for _, x0 in scored[:8] for o in offsets]
        points = [x for x in points if box.contains_x(x)]
        logging.debug("Resolvent search refined to step %.3g (best residual %.3g).", step, best)
    raise SolverLimitError(
        f"Residual search for '{op.name}' stalled at residual {best:.3g}.", finest_step=step, residual=best
    )


def _solve(op: Operator, y, lam: float, c: float, spec: NormSpec, box: Box, tol: Optional[float] = None) -> List[np.ndarray]:
    y = np.atleast_1d(np.asarray(y, dtype=float))
    tol = (config.SOLVER_RESIDUAL_TOL if tol is None else tol) * (1.0 + float(np.linalg.norm(y)))
    if c == 0 or spec.is_euclidean:
        pieces = op.exact_pieces()
        if pieces is not None:
            return _solve_exact(op, pieces, y, lam, c, box, tol)
        if isinstance(op, ParabolaNormalCone):
            return _solve_parabola(op, y, lam, c, box)
    if isinstance(op, SmoothMap):
        return _solve_smooth(op, y, lam, c, spec, box, tol)
    return _solve_generic(op, y, lam, c, spec, box, tol)


def resolvent_solve(
    op: Operator, lam: float, y_star, spec: Optional[NormSpec] = None, box: Optional[Box] = None, tol: Optional[float] = None
) -> List[np.ndarray]:
    """
    All x in the primal ball of `box` with y_star in J(x) + lam T(x) and the
    matching value (y_star - J(x)) / lam in the dual ball. Returns them sorted;
    an empty list means no solution.
    """
    if lam <= 0:
        raise BadParamsError(f"The resolvent needs lambda > 0, got {lam}.")
    spec = spec or NormSpec()
    if box is None:
        raise BadParamsError("resolvent_solve needs a box to search in.")
    return _solve(op, y_star, float(lam), 1.0, spec, box, tol)


# --- Probes ---


def _image_radii(first: float) -> List[float]:
    return [first / 2**k for k in range(config.PROBE_RADIUS_STEPS)]


def _lipschitz(queries) -> Optional[float]:
    solved = [(y, sols[0]) for y, sols in queries if len(sols) == 1]
    best = None
    for i in range(len(solved)):
        for j in range(i + 1, len(solved)):
            dy = float(np.linalg.norm(solved[i][0] - solved[j][0]))
            if dy > 1e-14:
                ratio = float(np.linalg.norm(solved[i][1] - solved[j][1])) / dy
                best = ratio if best is None else max(best, ratio)
    return best


def _run_probe(
    op: Operator,
    pt: GraphPoint,
    box: Box,
    lam: float,
    c: float,
    spec: NormSpec,
    y_center: np.ndarray,
    first_radius: float,
    density: int,
    operation: str,
) -> Tuple[Verdict, LocalizationProbe]:
    probe = LocalizationProbe(y_center, pt.x, lam)
    last_bad = None
    for radius in _image_radii(first_radius):
        probe.radii.append(radius)
        image = Box(pt.x, box.x_radius, y_center, radius, box.spec)
        queries = []
        bad = None
        leaked = False
        for y in image.v_grid(density):
            try:
                sols = _solve(op, y, lam, c, spec, box)
            except SolverLimitError as e:
                probe.queries = queries
                resolution = {"radius": radius, "density": density, "lambda": lam, **e.details}
                logging.warning("%s on %s is inconclusive: %s", operation, op.name, e)
                return Verdict(Status.INCONCLUSIVE, operation, resolution=resolution, message=str(e)), probe
            queries.append((y, sols))
            if len(sols) != 1 and bad is None:
                bad = (y, sols)
            if len(sols) == 1 and not box.interior_x(sols[0], 1e-9):
                leaked = True
        probe.queries = queries
        if bad is None and not leaked:
            probe.single_valued = True
            probe.covers_domain = True
            probe.lipschitz = _lipschitz(queries)
            moduli = {"lipschitz": probe.lipschitz}
            resolution = {"radius": radius, "density": density, "lambda": lam, "queries": len(queries)}
            return Verdict(Status.PASS, operation, moduli=moduli, resolution=resolution), probe
        last_bad = bad
        probe.leaked = leaked and bad is None
        logging.debug("%s radius %.3g: bad query %s, leaked %s.", operation, radius, bad is not None, leaked)
    resolution = {"radii": probe.radii, "density": density, "lambda": lam}
    if last_bad is None:
        return Verdict(Status.INCONCLUSIVE, operation, resolution=resolution, message="Solutions reach the box boundary."), probe
    y, sols = last_bad
    probe.covers_domain = bool(sols)
    witness = Witness(
        "resolvent",
        (pt,),
        {
            "y_star": y.tolist(),
            "lambda": lam,
            "c": c,
            "solutions": [s.tolist() for s in sols],
            "count": len(sols),
            "box": box.to_dict(),
        },
    )
    logging.info("%s fails for %s: %d solutions at y*=%s.", operation, op.name, len(sols), y.tolist())
    return Verdict(Status.FAIL, operation, witness, resolution=resolution), probe


def _require_point(op: Operator, pt: GraphPoint):
    if not op.contains(pt, 1e-9):
        raise PointNotInSetError(f"{pt} is not in the graph of '{op.name}'.")


def minty_local_probe(
    op: Operator,
    pt: GraphPoint,
    lam: Optional[float] = None,
    box: Optional[Box] = None,
    density: Optional[int] = None,
    spec: Optional[NormSpec] = None,
) -> Tuple[Verdict, LocalizationProbe]:
    """
    Tests for a continuous single-valued localization of (J + lam T)^{-1} around
    (J(x_bar) + lam v_bar, x_bar).

    Image balls of radius rho, rho/2, rho/4 (rho = 0.5 min(r_x, lam r_v)) are tried in
    turn; the first one where every query has exactly one interior solution passes.
    """
    lam = config.DEFAULT_LAMBDA if lam is None else float(lam)
    density = config.PROBE_DENSITY if density is None else density
    spec = spec or (box.spec if box is not None else NormSpec())
    box = box or Box.around(pt, 1.0, spec=spec)
    _require_point(op, pt)
    y_center = duality_map(pt.x, spec) + lam * pt.v
    first = config.PROBE_RADIUS_FRACTION * min(box.x_radius, lam * box.v_radius)
    verdict, probe = _run_probe(op, pt, box, lam, 1.0, spec, y_center, first, density, "minty_local_probe")
    logging.info("minty_local_probe on %s at %s, lambda=%s: %s", op.name, pt, lam, verdict.status.value)
    return verdict, probe


def inverse_localization_probe(
    op: Operator, pt: GraphPoint, box: Optional[Box] = None, density: Optional[int] = None
) -> Tuple[Verdict, LocalizationProbe]:
    """Tests for a continuous single-valued localization of T^{-1} around (v_bar, x_bar)."""
    density = config.PROBE_DENSITY if density is None else density
    box = box or Box.around(pt, 1.0)
    _require_point(op, pt)
    first = config.PROBE_RADIUS_FRACTION * box.v_radius
    return _run_probe(op, pt, box, 1.0, 0.0, box.spec, pt.v, first, density, "inverse_localization_probe")


def strong_inverse_probe(
    op: Operator, pt: GraphPoint, box: Optional[Box] = None, density: Optional[int] = None, tol: Optional[float] = None
) -> Verdict:
    """
    Local strong maximal monotonicity: a single-valued continuous localization of
    T^{-1} together with a positive strong modulus on the sampled graph.
    """
    density = config.PROBE_DENSITY if density is None else density
    box = box or Box.around(pt, 1.0)
    inverse, probe = inverse_localization_probe(op, pt, box, density)
    graph = op.sample_graph(box, density)
    try:
        modulus = strong_modulus(graph, box.spec, tol)
    except DegenerateError as e:
        modulus = Verdict(Status.INCONCLUSIVE, "strong_modulus", resolution={"points": len(graph)}, message=str(e))
    parts = {"inverse_localization": inverse, "strong_modulus": modulus}
    sigma_hat = modulus.moduli.get("sigma_hat")
    moduli = {"sigma_hat": sigma_hat, "lipschitz": probe.lipschitz}
    if modulus.passed and sigma_hat <= config.MODULUS_TOL:
        a, b = (GraphPoint(**p) for p in modulus.details["argmin_pair"])
        witness = Witness(
            "strong_pair",
            (a, b),
            {"ratio": sigma_hat, "modulus_tol": config.MODULUS_TOL, "spec": box.spec.to_dict()},
        )
        return Verdict(Status.FAIL, "strong_inverse_probe", witness, moduli, details=parts)
    return combine("strong_inverse_probe", parts, moduli=moduli)


def minty_sweep(
    op: Operator,
    pt: GraphPoint,
    box: Optional[Box] = None,
    density: Optional[int] = None,
    lambdas: Optional[Sequence[float]] = None,
) -> Verdict:
    """minty_local_probe at every lambda of the sweep; the verdict records the lambda set used."""
    lambdas = list(config.LAMBDA_SWEEP if lambdas is None else lambdas)
    parts: Dict[str, Verdict] = {}
    for lam in lambdas:
        parts[f"lambda={lam:g}"] = minty_local_probe(op, pt, lam, box, density)[0]
    return combine("minty_sweep", parts, resolution={"lambdas": lambdas})


def local_max_via_resolvent(
    op: Operator, pt: GraphPoint, box: Optional[Box] = None, density: Optional[int] = None, tol: Optional[float] = None
) -> Verdict:
    """Local maximal monotonicity by the resolvent route: sampled monotonicity plus the lambda sweep."""
    density = config.PROBE_DENSITY if density is None else density
    box = box or Box.around(pt, 1.0)
    graph = op.sample_graph(box, density)
    parts = {
        "monotone": monotone_witness(graph, box.spec, tol),
        "resolvent": minty_sweep(op, pt, box, density),
    }
    verdict = combine("local_max_via_resolvent", parts)
    logging.info("local_max_via_resolvent on %s at %s: %s", op.name, pt, verdict.status.value)
    return verdict


def localization_lipschitz(probe: LocalizationProbe) -> float:
    """l_hat = max over solved query pairs of |x1 - x2| / |y1 - y2|."""
    solved = [q for q in probe.queries if len(q[1]) == 1]
    if len(solved) < 2:
        raise DegenerateError("The probe has fewer than two solved queries.")
    value = _lipschitz(solved)
    if value is None:
        raise DegenerateError("All solved queries coincide.")
    return value


def revalidate_resolvent_witness(witness: Witness, op: Optional[Operator], spec: Optional[NormSpec] = None) -> bool:
    """A resolvent witness stands when its query still has zero or several solutions."""
    if op is None:
        return witness.data["count"] != 1
    box = Box(**witness.data["box"], spec=spec or NormSpec())
    sols = _solve(op, np.asarray(witness.data["y_star"]), witness.data["lambda"], witness.data["c"], box.spec, box)
    return len(sols) != 1

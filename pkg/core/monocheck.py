"""
Monotonicity analyses on sampled graphs: pairwise monotonicity, the strong and
hypomonotone moduli, the inner-semicontinuity probe, the type-(A) extension
search and the finite-graph extension LP.

Only FAIL verdicts are certificates; PASS verdicts from sampling hold at the
resolution recorded in the verdict.
"""

import logging
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog, minimize

import config
from core.errors import DegenerateError, EmptyGraphError, PointNotInSetError, UnboundedError, UnsupportedNormError
from core.normgeom import GraphPoint, NormSpec, duality_map
from core.verdict import Status, Verdict, Witness
from operators.box import Box
from operators.operator import Operator
from operators.sampled import SampledGraph
from operators.smooth import SmoothMap


def effective_tol(tol: Optional[float], diameter: float) -> float:
    """Inner-product threshold: tol scaled by (1 + diameter)^2."""
    tol = config.DEFAULT_TOL if tol is None else tol
    return tol * (1.0 + diameter) ** 2


def graph_diameter(g: SampledGraph) -> float:
    if len(g) < 2:
        return 0.0
    z = np.hstack([g.xs, g.vs])
    return float(np.max(np.ptp(z, axis=0)) * np.sqrt(z.shape[1]))


def _pair_inner_products(xs: np.ndarray, vs: np.ndarray) -> np.ndarray:
    """Matrix of <v_i - v_j, x_i - x_j>."""
    gram = vs @ xs.T
    diag = np.diag(gram)
    return diag[:, None] + diag[None, :] - gram - gram.T


def _distinct_x_pairs(xs: np.ndarray):
    n = len(xs)
    i, j = np.triu_indices(n, k=1)
    dx = xs[i] - xs[j]
    keep = np.linalg.norm(dx, axis=1) > 1e-14
    return i[keep], j[keep]


# --- Pairwise monotonicity ---


def monotone_witness(g: SampledGraph, spec: Optional[NormSpec] = None, tol: Optional[float] = None) -> Verdict:
    """PASS when <v1 - v2, x1 - x2> >= -tol over all pairs; FAIL with the most violating pair."""
    if not len(g):
        raise DegenerateError("Monotonicity needs a nonempty sample.")
    threshold = effective_tol(tol, graph_diameter(g))
    resolution = {"points": len(g)}
    if len(g) < 2:
        return Verdict(Status.PASS, "monotone_witness", resolution=resolution, tol=threshold)
    inner = _pair_inner_products(g.xs, g.vs)
    i, j = np.triu_indices(len(g), k=1)
    values = inner[i, j]
    worst = int(np.argmin(values))
    min_value = float(values[worst])
    moduli = {"min_inner_product": min_value}
    if min_value < -threshold:
        pair = (g.points[i[worst]], g.points[j[worst]])
        logging.info("Monotonicity violated: %s, %s (inner product %.3g).", pair[0], pair[1], min_value)
        witness = Witness("pair", pair, {"inner_product": min_value, "threshold": threshold})
        return Verdict(Status.FAIL, "monotone_witness", witness, moduli, resolution, threshold)
    return Verdict(Status.PASS, "monotone_witness", None, moduli, resolution, threshold)


def strong_modulus(g: SampledGraph, spec: Optional[NormSpec] = None, tol: Optional[float] = None) -> Verdict:
    """
    sigma_hat = min over pairs with x1 != x2 of
    <v1 - v2, x1 - x2> / <J(x1) - J(x2), x1 - x2>.

    FAIL (with sigma_hat < 0) when some numerator is below -tol.
    """
    spec = spec or NormSpec()
    i, j = _distinct_x_pairs(g.xs)
    if not len(i):
        raise DegenerateError("Every sample point shares one x; the strong modulus is undefined.")
    threshold = effective_tol(tol, graph_diameter(g))
    xs, vs = g.xs, g.vs
    js = np.array([duality_map(x, spec) for x in xs])
    dx = xs[i] - xs[j]
    numer = np.einsum("ij,ij->i", vs[i] - vs[j], dx)
    denom = np.einsum("ij,ij->i", js[i] - js[j], dx)
    ratios = numer / denom
    worst = int(np.argmin(ratios))
    resolution = {"points": len(g), "pairs": int(len(i))}
    if np.min(numer) < -threshold:
        bad = int(np.argmin(numer))
        pair = (g.points[i[bad]], g.points[j[bad]])
        witness = Witness("pair", pair, {"inner_product": float(numer[bad]), "threshold": threshold})
        return Verdict(
            Status.FAIL, "strong_modulus", witness, {"sigma_hat": float(ratios[worst])}, resolution, threshold
        )
    sigma_hat = max(float(ratios[worst]), 0.0)
    argmin = [g.points[i[worst]].to_dict(), g.points[j[worst]].to_dict()]
    return Verdict(
        Status.PASS, "strong_modulus", None, {"sigma_hat": sigma_hat}, resolution, threshold, {"argmin_pair": argmin}
    )


def hypo_modulus(g: SampledGraph, spec: Optional[NormSpec] = None, growth: Optional[float] = None) -> float:
    """
    r_hat = max(0, max over pairs with x1 != x2 of -<v1 - v2, x1 - x2> / |x1 - x2|^2).

    Raises UNBOUNDED when the largest ratio grows by `growth` or more at each of the
    three finest dyadic pair scales present in the sample.
    """
    if spec is not None and not spec.is_euclidean:
        raise UnsupportedNormError("Hypomonotonicity is measured in the Euclidean norm only.")
    growth = config.HYPO_GROWTH if growth is None else growth
    i, j = _distinct_x_pairs(g.xs)
    if not len(i):
        return 0.0
    dx = g.xs[i] - g.xs[j]
    dist = np.linalg.norm(dx, axis=1)
    ratios = -np.einsum("ij,ij->i", g.vs[i] - g.vs[j], dx) / dist**2
    scales = np.floor(np.log2(dist)).astype(int)
    finest = sorted(set(scales.tolist()))[:3]
    if len(finest) == 3:
        peaks = [float(np.max(ratios[scales == s])) for s in finest]
        if peaks[2] > 0 and peaks[1] >= growth * peaks[2] and peaks[0] >= growth * peaks[1]:
            pairs = []
            for s in finest:
                k = int(np.argmax(np.where(scales == s, ratios, -np.inf)))
                pairs.append([g.points[i[k]].to_dict(), g.points[j[k]].to_dict()])
            raise UnboundedError(
                f"Hypomonotonicity ratio grows as pairs shrink: {peaks}.", ratios=peaks, pairs=pairs
            )
    return max(0.0, float(np.max(ratios)))


# --- Inner semicontinuity ---


def isc_probe(
    op: Operator,
    pt: GraphPoint,
    radii: Optional[Sequence[float]] = None,
    eps: Optional[float] = None,
    density: Optional[int] = None,
    tol: Optional[float] = None,
) -> Verdict:
    """
    Searches x near x_bar whose value set stays more than eps(rho) away from v_bar.

    For each radius rho, grid points of the rho-ball inside dom T are visited
    nearest first; a FAIL names such an x. eps(rho) defaults to max(1e-6, rho).
    """
    radii = list(config.ISC_RADII if radii is None else radii)
    density = config.ISC_DENSITY if density is None else density
    tol = config.MEMBERSHIP_TOL if tol is None else tol
    if not op.contains(pt, max(tol, 1e-9)):
        raise PointNotInSetError(f"{pt} is not in the graph of '{op.name}'.")
    epsilons = []
    for rho in radii:
        epsilon = max(config.ISC_EPS_FLOOR, rho) if eps is None else eps
        epsilons.append(epsilon)
        ball = Box(pt.x, rho, pt.v, 2 * epsilon + 1, op_spec(op))
        grid = sorted(
            ball.x_grid(density),
            key=lambda x: (round(float(np.linalg.norm(x - pt.x)), 12), tuple(np.round(-(x - pt.x), 12))),
        )
        for x in grid:
            values = op.values_at(x, tol)
            if values.is_empty:
                continue
            distance = values.distance(pt.v)
            if distance > epsilon:
                logging.info("Inner semicontinuity fails at x=%s (distance %.3g > %.3g).", x.tolist(), distance, epsilon)
                witness = Witness(
                    "isc",
                    (pt, GraphPoint(x, pt.v)),
                    {"radius": rho, "distance": distance, "epsilon": epsilon},
                )
                return Verdict(
                    Status.FAIL, "isc_probe", witness, resolution={"radii": radii[: len(epsilons)], "density": density}
                )
    return Verdict(
        Status.PASS,
        "isc_probe",
        resolution={"radii": radii, "epsilons": epsilons, "density": density},
        tol=tol,
    )


def op_spec(op: Operator) -> NormSpec:
    """The norm an operator was built under (sigma*J shifts carry one); Euclidean otherwise."""
    return getattr(op, "spec", None) or NormSpec()


# --- Maximality ---


def _min_inner_product(x, v, xs: np.ndarray, vs: np.ndarray) -> float:
    if not len(xs):
        return np.inf
    return float(np.min(np.einsum("ij,ij->i", v - vs, x - xs)))


def _inner_products(candidate: GraphPoint, g: SampledGraph) -> np.ndarray:
    return np.einsum("ij,ij->i", candidate.v - g.vs, candidate.x - g.xs)


class ExtensionCheck:
    """
    The gap inf <y - v, x - u> over graph points (u, v) inside a box, for a candidate (x, y).

    A candidate off the graph with a gap >= -tol is a type-(A) extension point.
    Polyhedral graphs are minimized exactly over every piece clipped to the cube
    around the box, and smooth maps over the primal cube, so on those routes the
    gap is never larger than the true one. Other operators are sampled, with the
    sample refined around its worst points.
    """

    def __init__(self, op: Operator, box: Box, density: Optional[int] = None):
        self.op = op
        self.box = box
        self.density = config.DEFAULT_DENSITY if density is None else density
        self.lo, self.hi = box.cube_bounds()
        pieces = op.exact_pieces()
        self.clipped = None
        if pieces is not None:
            clipped = (p.clip_to_cube(self.lo, self.hi) for p in pieces)
            self.clipped = [c for c in clipped if not c.is_empty]

    @cached_property
    def graph(self) -> SampledGraph:
        return self.op.sample_graph(self.box, config.GRAPH_REFINEMENT * self.density - 1)

    @property
    def route(self) -> str:
        if self.clipped is not None:
            return "exact"
        return "smooth" if isinstance(self.op, SmoothMap) else "refined"

    def gap(self, candidate: GraphPoint) -> float:
        if self.route == "exact":
            return self._exact_gap(candidate)
        if self.route == "smooth":
            return self._smooth_gap(candidate)
        return self._refined_gap(candidate)

    def _exact_gap(self, candidate: GraphPoint) -> float:
        # <y - v, x - u> = 0.5 z.H z + g.z + y.x for z = (u, v).
        n = candidate.dim
        eye, zero = np.eye(n), np.zeros((n, n))
        hessian = np.block([[zero, eye], [eye, zero]])
        gradient = np.concatenate([-candidate.v, -candidate.x])
        best = min((c.quadratic_minimum(hessian, gradient)[0] for c in self.clipped), default=np.inf)
        return best + float(candidate.v @ candidate.x)

    def _smooth_gap(self, candidate: GraphPoint) -> float:
        op = self.op
        xlo, xhi = self.box.x_bounds()

        def gap_at(u):
            return float((candidate.v - op.value(u)) @ (candidate.x - u))

        def gradient(u):
            return -(op.jacobian_at(u).T @ (candidate.x - u)) - (candidate.v - op.value(u))

        values = _inner_products(candidate, self.graph)
        starts = [self.graph.xs[k] for k in np.argsort(values)[: config.EXTENSION_STARTS]]
        starts.append(np.clip(candidate.x, xlo, xhi))
        best = float(np.min(values))
        for u0 in starts:
            result = minimize(gap_at, u0, jac=gradient, method="L-BFGS-B", bounds=list(zip(xlo, xhi)))
            best = min(best, float(result.fun))
        return best

    def _refined_gap(self, candidate: GraphPoint) -> float:
        graph = self.graph
        values = _inner_products(candidate, graph)
        best = float(np.min(values))
        radius = 2.0 * max(self.box.x_radius, self.box.v_radius) / (config.GRAPH_REFINEMENT * self.density - 2)
        for level in range(config.EXTENSION_REFINEMENTS):
            centers = [graph.points[k] for k in np.argsort(values)[: config.EXTENSION_STARTS]]
            points = []
            for c in centers:
                try:
                    local = self.op.sample_graph(Box(c.x, radius, c.v, radius, self.box.spec), self.density)
                except EmptyGraphError:
                    continue
                points += [p for p in local if self.box.contains(p, 1e-12)]
            if not points:
                break
            graph = SampledGraph.of(points)
            values = _inner_products(candidate, graph)
            best = min(best, float(np.min(values)))
            logging.debug("Extension gap after refinement %d: %.3g.", level + 1, best)
            radius /= 2.0
        return best


def typeA_witness_search(
    op: Operator,
    pt: GraphPoint,
    box: Box,
    density: Optional[int] = None,
    tol: Optional[float] = None,
    seed: int = 0,
    extra_points: Optional[int] = None,
) -> Verdict:
    """
    Looks for (x, v) in the open box, off the graph, that is monotonically related
    to every graph point in the box. Such a point shows that type-(A) local
    maximality fails for this box.

    Grid candidates are visited nearest-to-(x_bar, v_bar) first, then seeded
    random candidates. A candidate only counts when it is farther from the graph
    than the graph sample spacing; it is screened against the graph sample and
    then confirmed by `ExtensionCheck`.
    """
    density = config.DEFAULT_DENSITY if density is None else density
    extra_points = config.RANDOM_EXTRA_POINTS if extra_points is None else extra_points
    if not op.contains(pt, 1e-9):
        raise PointNotInSetError(f"{pt} is not in the graph of '{op.name}'.")
    check = ExtensionCheck(op, box, density)
    graph = check.graph
    threshold = effective_tol(tol, box.diameter)
    xs, vs = graph.xs, graph.vs
    lo, hi = box.cube_bounds()
    spacing = float(np.min(hi - lo)) / (config.GRAPH_REFINEMENT * density - 2)
    z_bar = pt.as_vector()

    grid = [np.concatenate([x, v]) for x in box.x_grid(density) for v in box.v_grid(density)]
    grid.sort(key=lambda z: (round(float(np.linalg.norm(z - z_bar)), 12), tuple(np.round(-(z - z_bar), 12))))
    rng = np.random.default_rng(seed)
    randoms = [lo + (hi - lo) * rng.random(lo.size) for _ in range(extra_points)]

    n = box.dim
    checked = rejected = 0
    resolution = {"density": density, "graph_points": len(graph), "route": check.route}
    for z in grid + randoms:
        candidate = GraphPoint(z[:n], z[n:])
        if not box.interior(candidate):
            continue
        checked += 1
        if op.values_at(candidate.x).distance(candidate.v) < spacing:
            continue
        if _min_inner_product(candidate.x, candidate.v, xs, vs) < -threshold:
            continue
        gap = check.gap(candidate)
        if gap < -threshold:
            rejected += 1
            continue
        logging.info("Type-(A) extension point found for %s: %s", op.name, candidate)
        witness = Witness("extension", (candidate,), {"min_inner_product": gap, "threshold": threshold})
        return Verdict(
            Status.FAIL,
            "typeA_witness_search",
            witness,
            resolution={**resolution, "candidates": checked},
            tol=threshold,
            details={"box": box.to_dict()},
        )
    if rejected:
        logging.debug("%d sample-level extension candidates of %s were rejected by the graph check.", rejected, op.name)
    return Verdict(
        Status.PASS,
        "typeA_witness_search",
        resolution={**resolution, "candidates": checked, "seed": seed},
        tol=threshold,
        details={"box": box.to_dict()},
    )


def monotone_extension(g: SampledGraph, x, spec: Optional[NormSpec] = None) -> Optional[np.ndarray]:
    """
    A value v with <v - v_i, x - x_i> >= 0 for every sample, or None.

    Solved as a feasibility LP; this is the finite-graph form of extending a
    monotone graph to a new primal point.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not len(g):
        return np.zeros_like(x)
    dx = x - g.xs
    # -(x - x_i) . v <= -(x - x_i) . v_i
    a_ub = -dx
    b_ub = -np.einsum("ij,ij->i", dx, g.vs)
    result = linprog(np.zeros(x.size), A_ub=a_ub, b_ub=b_ub, bounds=[(None, None)] * x.size, method="highs")
    if result.status != 0:
        logging.debug("No monotone extension at x=%s (LP status %d).", x.tolist(), result.status)
        return None
    return np.asarray(result.x, dtype=float)


# --- Witness re-validation ---


def revalidate_witness(
    verdict: Verdict, op: Optional[Operator] = None, spec: Optional[NormSpec] = None, tol: Optional[float] = None
) -> bool:
    """
    Recomputes the defining inequality of a FAIL witness from its numbers alone,
    and against the operator when one is given. Non-FAIL verdicts re-validate trivially.
    """
    if not verdict.failed:
        return True
    w = verdict.witness
    threshold = w.data.get("threshold", effective_tol(tol, 0.0))
    if w.kind == "pair":
        a, b = w.points
        return float(np.dot(a.v - b.v, a.x - b.x)) < -threshold
    if w.kind == "strong_pair":
        a, b = w.points
        spec = NormSpec(**w.data["spec"]) if "spec" in w.data else (spec or NormSpec())
        dx = a.x - b.x
        ratio = float(np.dot(a.v - b.v, dx)) / float(np.dot(duality_map(a.x, spec) - duality_map(b.x, spec), dx))
        return ratio <= w.data.get("modulus_tol", config.MODULUS_TOL)
    if w.kind == "extension":
        (candidate,) = w.points
        if op is None:
            return w.data["min_inner_product"] >= -threshold
        if op.contains(candidate):
            return False
        box = Box(**verdict.details["box"], spec=spec or NormSpec())
        return ExtensionCheck(op, box, verdict.resolution["density"]).gap(candidate) >= -threshold
    if w.kind == "isc":
        ref, probe = w.points
        if op is None:
            return w.data["distance"] > w.data["epsilon"]
        return op.values_at(probe.x).distance(ref.v) > w.data["epsilon"]
    if w.kind == "coderivative":
        from core.vardiff import revalidate_coderivative_witness

        return revalidate_coderivative_witness(w, op)
    if w.kind == "resolvent":
        from core.resolvent import revalidate_resolvent_witness

        return revalidate_resolvent_witness(w, op, spec)
    logging.warning("No re-validation rule for witness kind '%s'.", w.kind)
    return False

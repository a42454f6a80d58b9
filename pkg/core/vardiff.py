"""
Generalized differentiation on polyhedral graphs: regular and limiting normal
cones to finite unions of polyhedra, the coderivatives they induce, and the
positive-semidefiniteness criteria for local maximal (strong) monotonicity.

Coderivative cones live in (w, z) space: z in D*T(u, v)(w) exactly when
(z, -w) is normal to gph T at (u, v).
"""

import logging
from functools import lru_cache
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

import config
from core.errors import (
    PointNotInSetError,
    UnboundedError,
    UnsupportedError,
    UnsupportedNormError,
)
from core.monocheck import hypo_modulus
from core.normgeom import GraphPoint
from core.polycone import ConeUnion, PolyCone
from core.verdict import Status, Verdict, Witness, combine
from operators.box import Box
from operators.operator import Operator
from operators.polyhedron import Polyhedron
from operators.smooth import SmoothMap
from utils.rational import Vector, dot, frac_vector, snap_vector, to_floats


# --- Normal cones to unions of polyhedra ---


def _piece_normal_cone(piece: Polyhedron, z: Vector) -> PolyCone:
    m = piece.dim
    active = piece.active_set(z)
    gens = [r[:m] for i, r in enumerate(piece.ineqs) if i in active]
    lin = [r[:m] for r in piece.eqs]
    return PolyCone.generated_by(gens, lin, m)


def _containing(pieces: Sequence[Polyhedron], z: Vector) -> List[Polyhedron]:
    return [p for p in pieces if p.contains_exact(z)]


def _regular_cone(pieces: Sequence[Polyhedron], z: Vector) -> PolyCone:
    containing = _containing(pieces, z)
    if not containing:
        raise PointNotInSetError(f"Point {to_floats(z).tolist()} lies in none of the {len(pieces)} pieces.")
    cone = _piece_normal_cone(containing[0], z)
    for piece in containing[1:]:
        cone = cone.intersect(_piece_normal_cone(piece, z))
    return cone


def regular_normal_cone(pieces: Sequence[Polyhedron], z) -> PolyCone:
    """
    Regular normal cone to the union of `pieces` at z: the intersection, over the
    pieces containing z, of their (convex) normal cones at z.
    """
    return _regular_cone(pieces, frac_vector(z))


def _stable_step(pieces: Sequence[Polyhedron], z: Vector, d: Vector):
    """A t in (0, 1] below every breakpoint where z + s d enters or leaves a piece, for 0 < s <= t."""
    breakpoints = [1]
    for piece in pieces:
        m = piece.dim
        rows = list(piece.ineqs) + list(piece.eqs) + [tuple(-c for c in r[:m]) + (-r[m],) for r in piece.eqs]
        for r in rows:
            slope = dot(r[:m], d)
            if slope == 0:
                continue
            t = (r[m] - dot(r[:m], z)) / slope
            if t > 0:
                breakpoints.append(t)
    return min(breakpoints) / 2


def _face_points_near(piece: Polyhedron, z: Vector) -> List[Vector]:
    """Relative-interior points of the faces of `piece` whose closure contains z, one direction each."""
    rows = piece.ineqs
    active = sorted(piece.active_set(z))
    directions = []
    for size in range(len(active) + 1):
        for subset in combinations(active, size):
            face = Polyhedron.build(rows, list(piece.eqs) + [rows[i] for i in subset], piece.dim)
            rep = face.relint_point()
            if rep is None:
                continue
            directions.append(tuple(a - b for a, b in zip(rep, z)))
    return directions


def _limiting_cone(pieces: Sequence[Polyhedron], z: Vector) -> ConeUnion:
    cones = [_regular_cone(pieces, z)]
    for piece in _containing(pieces, z):
        for d in _face_points_near(piece, z):
            if all(c == 0 for c in d):
                continue
            t = _stable_step(pieces, z, d)
            w = tuple(a + t * b for a, b in zip(z, d))
            cones.append(_regular_cone(pieces, w))
    return ConeUnion(tuple(cones))


def limiting_normal_cone(pieces: Sequence[Polyhedron], z) -> ConeUnion:
    """
    Limiting normal cone to the union of `pieces` at z: the regular cone at z
    together with the regular cones attained on every face whose closure contains z.
    """
    return _limiting_cone(pieces, frac_vector(z))


# --- Coderivatives ---


def _swap_matrix(n: int):
    """(n_x, n_v) -> (w, z) = (-n_v, n_x)."""
    top = [[0] * n + [-int(i == j) for j in range(n)] for i in range(n)]
    bottom = [[int(i == j) for j in range(n)] + [0] * n for i in range(n)]
    return top + bottom


def _smooth_cone(op: SmoothMap, x) -> PolyCone:
    jac = op.jacobian_at(x)
    n = op.dim
    basis = [tuple(float(int(i == j)) for j in range(n)) + tuple(jac.T[:, i].tolist()) for i in range(n)]
    return PolyCone.generated_by([], [frac_vector(snap_vector(b, config.DEFAULT_TOL)) for b in basis], 2 * n)


def _graph_pieces(op: Operator, pt: GraphPoint) -> List[Polyhedron]:
    for box in op.localization_boxes():
        if not box.interior(pt):
            raise UnsupportedError(
                f"{pt} is on the boundary of a localization box of '{op.name}'; coderivatives are taken at interior points."
            )
    return op.polyhedral_pieces()


def _exact_point(pieces: Sequence[Polyhedron], pt: GraphPoint) -> Vector:
    z = snap_vector(pt.as_vector(), config.MEMBERSHIP_TOL)
    if not _containing(pieces, z):
        raise PointNotInSetError(f"{pt} is not in the graph.")
    return z


def _regular_coderivative_at(pieces, z: Vector, n: int) -> PolyCone:
    return _regular_cone(pieces, z).map_linear(_swap_matrix(n))


def _limiting_coderivative_at(pieces, z: Vector, n: int) -> ConeUnion:
    return _limiting_cone(pieces, z).map_linear(_swap_matrix(n))


def regular_coderivative(op: Operator, pt: GraphPoint) -> PolyCone:
    """{(w, z) : (z, -w) regular normal to gph op at pt}; for a smooth map, the graph of w -> DF(x)^T w."""
    if isinstance(op, SmoothMap) and op.affine is None:
        if not op.contains(pt, 1e-9):
            raise PointNotInSetError(f"{pt} is not in the graph of '{op.name}'.")
        return _smooth_cone(op, pt.x)
    pieces = _graph_pieces(op, pt)
    return _regular_coderivative_at(pieces, _exact_point(pieces, pt), op.dim)


def limiting_coderivative(op: Operator, pt: GraphPoint) -> ConeUnion:
    """The limiting normal cone to gph op at pt, carried into (w, z) pairs."""
    if isinstance(op, SmoothMap) and op.affine is None:
        return ConeUnion((regular_coderivative(op, pt),))
    pieces = _graph_pieces(op, pt)
    return _limiting_coderivative_at(pieces, _exact_point(pieces, pt), op.dim)


# --- Positive-semidefiniteness ---


@lru_cache(maxsize=4096)
def _simplex_minimum(matrix_bytes: bytes, size: int) -> Tuple[float, Tuple[float, ...]]:
    """
    min of l^T M l over the unit simplex, by enumerating the KKT system of every
    face: M_SS l_S = mu 1, sum(l_S) = 1, l_S >= 0. The value at a stationary point is mu.
    """
    m = np.frombuffer(matrix_bytes, dtype=float).reshape(size, size)
    best, best_point = np.inf, None
    for k in range(1, size + 1):
        for support in combinations(range(size), k):
            s = list(support)
            kkt = np.zeros((k + 1, k + 1))
            kkt[:k, :k] = m[np.ix_(s, s)]
            kkt[:k, k] = -1.0
            kkt[k, :k] = 1.0
            rhs = np.zeros(k + 1)
            rhs[k] = 1.0
            sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
            if np.linalg.norm(kkt @ sol - rhs) > 1e-9:
                continue
            lam = sol[:k]
            if np.any(lam < -1e-12):
                continue
            point = np.zeros(size)
            point[s] = np.clip(lam, 0.0, None)
            value = float(point @ m @ point)
            if value < best - 1e-15:
                best, best_point = value, tuple(point.tolist())
    return best, best_point


def _form(n: int, sigma: float) -> np.ndarray:
    """Symmetric matrix of (w, z) -> <z, w> - sigma |w|^2."""
    eye = np.eye(n)
    return np.block([[-sigma * eye, 0.5 * eye], [0.5 * eye, np.zeros((n, n))]])


def _cone_minimum(cone: PolyCone, n: int, sigma: float):
    """Most negative normalized value of the form on the cone, or None when it is nonnegative."""
    vectors = cone.spanning_vectors()
    if not vectors:
        return None
    h = np.array([to_floats(v) for v in vectors]).T
    m = h.T @ _form(n, sigma) @ h
    m = (m + m.T) / 2.0
    value, point = _simplex_minimum(np.ascontiguousarray(m).tobytes(), m.shape[0])
    scale = max(1.0, float(np.max(np.abs(m))))
    if value >= -config.DEFAULT_TOL * scale:
        return None
    wz = h @ np.asarray(point)
    w, z = wz[:n], wz[n:]
    norm = float(np.linalg.norm(w))
    w, z = w / norm, z / norm
    w = np.asarray([float(c) for c in snap_vector(w, 1e-9)])
    z = np.asarray([float(c) for c in snap_vector(z, 1e-9)])
    return float(z @ w - sigma * (w @ w)), w, z


def _strata(op: Operator, box: Box, density: int):
    """
    Graph points at which coderivative cones are evaluated, with the cone map to use.

    Exact graphs give one representative per face of each piece (and of each
    pairwise piece intersection) inside the box; smooth maps are sampled.
    """
    n = op.dim
    if isinstance(op, SmoothMap) and op.affine is None:
        graph = op.sample_graph(box, density)
        return "sampled", [(p, ConeUnion((_smooth_cone(op, p.x),))) for p in graph]
    pieces = op.polyhedral_pieces()
    lo, hi = box.cube_bounds()
    meets = list(pieces) + [a.intersect(b) for a, b in combinations(pieces, 2)]
    points = {}
    for piece in meets:
        for rep, _ in piece.faces_in_cube(lo, hi):
            points.setdefault(rep, None)
    strata = []
    for z in sorted(points):
        pt = GraphPoint(to_floats(z[:n]), to_floats(z[n:]))
        if not box.contains(pt, 1e-12) or any(not b.contains(pt, 1e-12) for b in op.localization_boxes()):
            continue
        strata.append((pt, _limiting_coderivative_at(pieces, z, n)))
    return "exact", strata


def _psd_check(strata, n: int, sigma: float):
    for pt, cones in strata:
        for cone in cones.cones:
            found = _cone_minimum(cone, n, sigma)
            if found is not None:
                return pt, found
    return None


def psd_criterion(op: Operator, box: Box, sigma: float = 0.0, density: Optional[int] = None) -> Verdict:
    """
    Checks <z, w> - sigma |w|^2 >= 0 for every (w, z) in the limiting coderivative
    cone at every stratum of gph op inside the box. FAIL carries (u, v, w, z) with
    |w| = 1 and the negative value.
    """
    if not box.spec.is_euclidean:
        raise UnsupportedNormError("The coderivative criterion is stated for the Euclidean norm.")
    density = config.DEFAULT_DENSITY if density is None else density
    method, strata = _strata(op, box, density)
    n = op.dim
    resolution = {"strata": len(strata), "method": method}
    if method == "sampled":
        resolution["density"] = density
    bad = _psd_check(strata, n, sigma)
    if bad is None:
        return Verdict(Status.PASS, "psd_criterion", resolution=resolution, details={"sigma": sigma})
    pt, (value, w, z) = bad
    logging.info("PSD criterion fails for %s at %s: w=%s, z=%s, value %.3g.", op.name, pt, w.tolist(), z.tolist(), value)
    witness = Witness(
        "coderivative", (pt,), {"w": w.tolist(), "z": z.tolist(), "value": value, "sigma": sigma}
    )
    return Verdict(Status.FAIL, "psd_criterion", witness, resolution=resolution, details={"sigma": sigma})


def psd_supremum(op: Operator, box: Box, density: Optional[int] = None) -> float:
    """Largest sigma passing psd_criterion, by bisection on the exact test (capped at PSD_SIGMA_CAP)."""
    density = config.DEFAULT_DENSITY if density is None else density
    if not box.spec.is_euclidean:
        raise UnsupportedNormError("The coderivative criterion is stated for the Euclidean norm.")
    method, strata = _strata(op, box, density)
    n = op.dim

    def passes(sigma: float) -> bool:
        return _psd_check(strata, n, sigma) is None

    cap = config.PSD_SIGMA_CAP
    if passes(0.0):
        lo, hi = 0.0, 1.0
        while passes(hi):
            lo, hi = hi, hi * 2.0
            if hi > cap:
                logging.warning("psd_supremum for %s reached the cap %g.", op.name, cap)
                return cap
    else:
        lo, hi = -1.0, 0.0
        while not passes(lo):
            lo, hi = lo * 2.0, lo
            if lo < -cap:
                raise UnboundedError(f"No sigma >= {-cap:g} passes the criterion for '{op.name}'.")
    for _ in range(config.PSD_BISECTION_STEPS):
        mid = (lo + hi) / 2.0
        if passes(mid):
            lo = mid
        else:
            hi = mid
    return lo


def local_max_via_coderivative(
    op: Operator, pt: GraphPoint, box: Box, density: Optional[int] = None, sigma: float = 0.0
) -> Verdict:
    """
    Local maximal monotonicity from hypomonotonicity plus the PSD criterion
    (sigma = 0), or local strong maximal monotonicity with modulus sigma > 0.
    """
    density = config.DEFAULT_DENSITY if density is None else density
    if not op.contains(pt, 1e-9):
        raise PointNotInSetError(f"{pt} is not in the graph of '{op.name}'.")
    graph = op.sample_graph(box, density)
    try:
        r_hat = hypo_modulus(graph, box.spec)
        hypo = Verdict(Status.PASS, "hypo_modulus", moduli={"r_hat": r_hat}, resolution={"points": len(graph)})
    except UnboundedError as e:
        hypo = Verdict(
            Status.INCONCLUSIVE, "hypo_modulus", resolution={"points": len(graph), **e.details}, message=str(e)
        )
    parts: Dict[str, Verdict] = {"hypomonotone": hypo, "psd": psd_criterion(op, box, sigma, density)}
    verdict = combine("local_max_via_coderivative", parts)
    verdict.moduli = {"r_hat": hypo.moduli.get("r_hat"), "sigma": sigma}
    logging.info("local_max_via_coderivative on %s at %s (sigma=%g): %s", op.name, pt, sigma, verdict.status.value)
    return verdict


def revalidate_coderivative_witness(witness: Witness, op: Optional[Operator] = None) -> bool:
    """The witness value is recomputed from (w, z); with an operator, (w, z) is re-checked against the cone."""
    w = np.asarray(witness.data["w"], dtype=float)
    z = np.asarray(witness.data["z"], dtype=float)
    value = float(z @ w - witness.data["sigma"] * (w @ w))
    if value >= -config.DEFAULT_TOL:
        return False
    if op is None:
        return True
    (pt,) = witness.points
    cones = limiting_coderivative(op, pt)
    return cones.contains(snap_vector(np.concatenate([w, z]), 1e-9))

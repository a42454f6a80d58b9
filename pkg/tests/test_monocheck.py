"""Tests for verdicts and the sampled monotonicity analyses."""

import numpy as np
import pytest

from catalog.builtins import builtin
from core.errors import DegenerateError, PointNotInSetError, UnboundedError, UnsupportedNormError
from core.monocheck import (
    ExtensionCheck,
    hypo_modulus,
    isc_probe,
    monotone_extension,
    monotone_witness,
    revalidate_witness,
    strong_modulus,
    typeA_witness_search,
)
from core.normgeom import GraphPoint, NormSpec, duality_map, shear_vertical
from core.verdict import Status, Verdict, Witness, combine
from operators.box import Box
from operators.composite import op_scale
from operators.sampled import SampledGraph

ORIGIN_1D = GraphPoint([0], [0])
ORIGIN_2D = GraphPoint([0, 0], [0, 0])


def _sample(name: str, point: GraphPoint = ORIGIN_1D, radius: float = 1.0, density: int = 5) -> SampledGraph:
    return builtin(name).sample_graph(Box.around(point, radius), density)


# --- Verdicts ---


def test_verdict_invariants():
    """FAIL needs a witness and INCONCLUSIVE needs a resolution."""
    with pytest.raises(ValueError):
        Verdict(Status.FAIL, "x")
    with pytest.raises(ValueError):
        Verdict(Status.INCONCLUSIVE, "x")
    assert Verdict("PASS", "x").passed


def test_combine_is_a_conjunction():
    ok = Verdict(Status.PASS, "a")
    unsure = Verdict(Status.INCONCLUSIVE, "b", resolution={"density": 5})
    bad = Verdict(Status.FAIL, "c", Witness("pair", (ORIGIN_1D, ORIGIN_1D)))
    assert combine("all", {"a": ok, "b": ok}).passed
    assert combine("all", {"a": ok, "b": unsure}).status is Status.INCONCLUSIVE
    failing = combine("all", {"a": ok, "b": unsure, "c": bad})
    assert failing.failed and failing.witness is bad.witness
    assert set(failing.sub_verdicts()) == {"a", "b", "c"}


# --- Pairwise Monotonicity ---


def test_identity_is_monotone():
    verdict = monotone_witness(_sample("identity"))
    assert verdict.passed
    assert verdict.moduli["min_inner_product"] >= 0.0


def test_negative_identity_fails_with_pair():
    verdict = monotone_witness(_sample("neg_identity"))
    assert verdict.failed
    a, b = verdict.witness.points
    assert float(np.dot(a.v - b.v, a.x - b.x)) < 0
    assert revalidate_witness(verdict)


def test_tampered_witness_does_not_revalidate():
    pair = (GraphPoint([0], [0]), GraphPoint([1], [1]))
    forged = Verdict(Status.FAIL, "monotone_witness", Witness("pair", pair, {"inner_product": -1.0, "threshold": 1e-9}))
    assert not revalidate_witness(forged)


def test_single_point_sample_passes():
    assert monotone_witness(SampledGraph.from_pairs([([0], [0])])).passed
    with pytest.raises(DegenerateError):
        monotone_witness(SampledGraph.of([]))


# --- Moduli ---


def test_strong_modulus_of_sampled_pairs():
    verdict = strong_modulus(SampledGraph.from_pairs([([0], [0]), ([1], [3]), ([2], [7])]))
    assert verdict.moduli["sigma_hat"] == pytest.approx(3.0)
    assert strong_modulus(_sample("identity")).moduli["sigma_hat"] == pytest.approx(1.0)


def test_strong_modulus_errors():
    with pytest.raises(DegenerateError):
        strong_modulus(SampledGraph.from_pairs([([0], [0]), ([0], [1])]))
    assert strong_modulus(_sample("neg_identity")).failed


def test_strong_modulus_under_p_norm():
    """For T = J under any p-norm, sigma_hat is 1."""
    spec = NormSpec(3.0)
    pairs = [([x, y], duality_map([x, y], spec)) for x in (-1.0, 0.5, 2.0) for y in (-0.5, 1.0)]
    verdict = strong_modulus(SampledGraph.from_pairs(pairs), spec)
    assert verdict.moduli["sigma_hat"] == pytest.approx(1.0)


def test_hypo_modulus():
    assert hypo_modulus(_sample("neg_identity")) == pytest.approx(1.0)
    assert hypo_modulus(_sample("identity")) == 0.0
    with pytest.raises(UnsupportedNormError):
        hypo_modulus(_sample("identity"), NormSpec(3.0))


def test_hypo_modulus_unbounded():
    """v = -x^(1/4) steepens fast enough near 0 that the ratio keeps growing as pairs shrink."""
    pairs = [([x], [-(x**0.25)]) for x in (0.0, 0.125, 0.25, 0.5)]
    with pytest.raises(UnboundedError) as info:
        hypo_modulus(SampledGraph.from_pairs(pairs))
    assert len(info.value.details["pairs"]) == 3


@pytest.mark.parametrize("sigma", [0.25, 0.5, 1.0, 2.0])
def test_hypo_modulus_drops_by_sigma_under_shear(sigma):
    """Adding sigma x to every value lowers each ratio by sigma, clipped at zero."""
    grid = np.linspace(-1.0, 1.0, 5)
    g = SampledGraph.from_pairs([([a, b], [-a, 0.5 * b]) for a in grid for b in grid])
    r_hat = hypo_modulus(g)
    assert r_hat == pytest.approx(1.0)
    sheared = g.mapped(lambda p: shear_vertical(p, sigma, NormSpec()))
    assert hypo_modulus(sheared) == pytest.approx(max(0.0, r_hat - sigma), abs=1e-12)


@pytest.mark.parametrize("c", [0.5, 2.0, 3.0])
@pytest.mark.parametrize("name", ["identity", "linear"])
def test_strong_modulus_scales_with_the_operator(name, c):
    op = builtin(name)
    n = op.dim
    box = Box(np.zeros(n), 1.0, np.zeros(n), 100.0)
    base = strong_modulus(op.sample_graph(box, 5)).moduli["sigma_hat"]
    scaled = strong_modulus(op_scale(op, c).sample_graph(box, 5)).moduli["sigma_hat"]
    assert scaled == pytest.approx(c * base, abs=1e-9)


# --- Inner Semicontinuity ---


def test_isc_holds_for_identity():
    verdict = isc_probe(builtin("identity"), ORIGIN_1D)
    assert verdict.passed
    assert verdict.resolution["radii"] == [0.5, 0.25, 0.125]


def test_isc_fails_for_parabola_cone():
    """Inside the parabola set the only value is 0, far from (0, -1)."""
    pt = GraphPoint([0, 0], [0, -1])
    op = builtin("normal_cone_parabola")
    verdict = isc_probe(op, pt, radii=[0.5])
    assert verdict.failed
    assert verdict.witness.data["distance"] > verdict.witness.data["epsilon"]
    assert revalidate_witness(verdict, op)


def test_isc_requires_graph_point():
    with pytest.raises(PointNotInSetError):
        isc_probe(builtin("identity"), GraphPoint([0], [1]))


# --- Maximality Searches ---


def test_typeA_search_passes_on_identity():
    box = Box.around(ORIGIN_1D, 1.0)
    verdict = typeA_witness_search(builtin("identity"), ORIGIN_1D, box)
    assert verdict.passed
    assert verdict.resolution["seed"] == 0


def test_typeA_search_finds_example35_extension():
    op = builtin("example35_sum")
    box = Box.around(ORIGIN_2D, 1.0)
    verdict = typeA_witness_search(op, ORIGIN_2D, box)
    assert verdict.failed
    (candidate,) = verdict.witness.points
    assert candidate == GraphPoint([0.5, 0.0], [0.0, 0.0])
    assert revalidate_witness(verdict, op)


def test_typeA_search_is_deterministic_per_seed():
    op = builtin("singleton_graph")
    box = Box.around(ORIGIN_1D, 1.0)
    first = typeA_witness_search(op, ORIGIN_1D, box, seed=7)
    second = typeA_witness_search(op, ORIGIN_1D, box, seed=7)
    assert first.failed
    assert first.witness.points[0] == GraphPoint([0.5], [0.0])
    assert first.witness.to_dict() == second.witness.to_dict()


def test_extension_gap_is_exact_on_polyhedral_graphs():
    """For T = x on [-1, 1], inf (y - u)(x - u) is -(x - y)^2 / 4 when (x + y) / 2 is inside."""
    check = ExtensionCheck(builtin("identity"), Box.around(ORIGIN_1D, 1.0))
    assert check.route == "exact"
    assert check.gap(GraphPoint([0.5], [-0.5])) == pytest.approx(-0.25)
    assert check.gap(GraphPoint([0.2], [0.6])) == pytest.approx(-0.04)


def test_extension_gap_sees_between_sample_points():
    """For diag(2, 5), the point ((0, 0), (0.5, 0)) clears the coarse sample but not the graph."""
    op = builtin("linear")
    box = Box.around(ORIGIN_2D, 1.0)
    candidate = GraphPoint([0, 0], [0.5, 0])
    check = ExtensionCheck(op, box)
    coarse = float(np.min(np.einsum("ij,ij->i", candidate.v - check.graph.vs, candidate.x - check.graph.xs)))
    assert coarse >= -1e-12
    # Minimum of -0.5 u1 + 2 u1^2 + 5 u2^2, at u = (1/8, 0).
    assert check.gap(candidate) == pytest.approx(-1.0 / 32.0)


def test_extension_gap_for_smooth_maps():
    check = ExtensionCheck(builtin("cubic"), Box.around(GraphPoint([1], [1]), 1.0))
    assert check.route == "smooth"
    # (1.5 - u^3)(1 - u) is negative for 1 < u < 1.5^(1/3).
    assert check.gap(GraphPoint([1.0], [1.5])) < -1e-3


@pytest.mark.parametrize(
    "name, point",
    [
        ("linear", ORIGIN_2D),
        ("linear", GraphPoint([1, 0], [2, 0])),
        ("linear", GraphPoint([0, 1], [0, 5])),
        ("cubic", GraphPoint([1], [1])),
        ("cubic", GraphPoint([-0.5], [-0.125])),
        ("normal_cone_polyhedron", GraphPoint([0.5, 0.5], [0.5, 0.5])),
    ],
)
def test_typeA_search_passes_on_maximal_operators(name, point):
    """No point of the box extends a maximal monotone graph, so the search must not report one."""
    op = builtin(name)
    verdict = typeA_witness_search(op, point, Box.around(point, 1.0))
    assert verdict.passed, verdict.witness


def test_forged_extension_witness_is_rejected():
    op = builtin("linear")
    box = Box.around(ORIGIN_2D, 1.0)
    candidate = GraphPoint([0, 0], [0.5, 0])
    forged = Verdict(
        Status.FAIL,
        "typeA_witness_search",
        Witness("extension", (candidate,), {"min_inner_product": 0.0, "threshold": 9e-9}),
        resolution={"density": 5},
        details={"box": box.to_dict()},
    )
    assert revalidate_witness(forged)
    assert not revalidate_witness(forged, op)


def test_monotone_extension_lp():
    flat = SampledGraph.from_pairs([([0], [0]), ([1], [0])])
    assert monotone_extension(flat, [0.5]) == pytest.approx(np.array([0.0]), abs=1e-9)
    crossing = SampledGraph.from_pairs([([0], [1]), ([1], [0])])
    assert monotone_extension(crossing, [0.5]) is None
    diagonal = _sample("identity")
    value = monotone_extension(diagonal, [0.3])
    assert value is not None and 0.0 <= value[0] <= 0.5 + 1e-9

"""Tests for norms, duality mappings, graph points and the two graph shears."""

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

import config
from catalog.builtins import builtin
from core.errors import BadParamsError, DimensionMismatchError, UnsupportedNormError
from core.monocheck import strong_modulus
from core.normgeom import (
    GraphPoint,
    NormSpec,
    duality_map,
    in_sheared_region,
    inverse_shear_transvect,
    shear_transvect,
    shear_vertical,
)
from operators.box import Box
from operators.composite import op_inverse, op_shift_J
from operators.sampled import SampledGraph

coordinate = st.floats(min_value=-10, max_value=10).filter(lambda t: t == 0.0 or abs(t) > 1e-6)
# Central differences need every nonzero coordinate well away from the kink of |t|^p at 0.
away_from_axes = st.one_of(st.just(0.0), st.floats(min_value=0.1, max_value=10), st.floats(min_value=-10, max_value=-0.1))


@st.composite
def norm_and_vector(draw: st.DrawFn, coordinates: st.SearchStrategy = coordinate):
    n = draw(st.integers(min_value=1, max_value=4))
    p = draw(st.floats(min_value=1.2, max_value=6.0))
    weighted = draw(st.booleans())
    weights = tuple(draw(st.floats(min_value=0.25, max_value=4.0)) for _ in range(n)) if weighted else ()
    x = np.array([draw(coordinates) for _ in range(n)])
    return NormSpec(p, weights), x


# --- NormSpec ---


def test_euclidean_defaults():
    spec = NormSpec()
    assert spec.is_euclidean
    assert spec.q == 2.0
    assert spec.norm([3, 4]) == pytest.approx(5.0)
    assert spec.dual_norm([3, 4]) == pytest.approx(5.0)


def test_conjugate_exponent():
    assert NormSpec(3.0).q == pytest.approx(1.5)
    assert not NormSpec(2.0, (1.0, 2.0)).is_euclidean


@pytest.mark.parametrize("p", [1.0, 0.5, float("inf"), float("nan")])
def test_rejects_bad_exponents(p):
    with pytest.raises(BadParamsError):
        NormSpec(p)


def test_rejects_bad_weights():
    with pytest.raises(BadParamsError):
        NormSpec(2.0, (1.0, 0.0))
    with pytest.raises(DimensionMismatchError):
        NormSpec(2.0, (1.0, 2.0)).norm([1, 2, 3])


def test_half_widths_of_weighted_balls():
    """The weighted primal ball of radius 1 reaches 1 / w_i^(1/p) along axis i."""
    spec = NormSpec(2.0, (4.0, 1.0))
    assert np.allclose(spec.primal_half_widths(1.0, 2), [0.5, 1.0])
    assert np.allclose(spec.dual_half_widths(1.0, 2), [2.0, 1.0])


# --- Duality Mapping ---


def test_p3_duality_example():
    """For p = 3 the map is ||x||_3^(-1) |x_i|^2 sign(x_i)."""
    assert np.allclose(duality_map([1.0, 1.0], NormSpec(3.0)), [2 ** (-1 / 3), 2 ** (-1 / 3)])
    pt = shear_vertical(GraphPoint([1, 1], [0, 0]), 2.0, NormSpec(3.0))
    assert np.allclose(pt.v, 2 * duality_map([1.0, 1.0], NormSpec(3.0)))


@settings(max_examples=200, deadline=None)
@given(norm_and_vector(away_from_axes))
def test_duality_is_gradient_of_half_norm_squared(data):
    """J matches central differences of 0.5 ||.||^2 away from the origin."""
    spec, x = data
    assume(spec.norm(x) >= 0.1)
    h = 1e-6 * max(1.0, float(np.max(np.abs(x))))
    grad = np.array(
        [(0.5 * spec.norm(x + h * e) ** 2 - 0.5 * spec.norm(x - h * e) ** 2) / (2 * h) for e in np.eye(len(x))]
    )
    assert np.allclose(duality_map(x, spec), grad, rtol=config.FD_REL_TOL, atol=config.FD_REL_TOL * spec.norm(x))


def test_euclidean_duality_is_identity():
    x = np.array([1.5, -2.0, 0.25])
    assert duality_map(x, NormSpec()) == pytest.approx(x)
    assert np.array_equal(duality_map([0, 0], NormSpec(3.0)), [0.0, 0.0])


@settings(max_examples=200, deadline=None)
@given(norm_and_vector())
def test_duality_pairing_and_dual_norm(data):
    """<J(x), x> = ||x||^2 and ||J(x)||_* = ||x|| for every weighted p-norm."""
    spec, x = data
    j = duality_map(x, spec)
    norm = spec.norm(x)
    assert float(np.dot(j, x)) == pytest.approx(norm**2, rel=1e-9, abs=1e-12)
    assert spec.dual_norm(j) == pytest.approx(norm, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_duality_pairing_on_seeded_batch(p):
    rng = np.random.default_rng(int(p * 10))
    for _ in range(10_000):
        n = int(rng.integers(1, 5))
        spec = NormSpec(p, tuple(float(w) for w in rng.uniform(0.25, 4.0, n)))
        x = rng.standard_normal(n) * 10.0 ** rng.uniform(-3.0, 3.0)
        j = duality_map(x, spec)
        norm = spec.norm(x)
        assert abs(float(np.dot(j, x)) - norm**2) <= 1e-9 * norm**2
        assert abs(spec.dual_norm(j) - norm) <= 1e-9 * norm


@settings(max_examples=100, deadline=None)
@given(norm_and_vector(), st.floats(min_value=0.1, max_value=10))
def test_duality_is_positively_homogeneous(data, t):
    spec, x = data
    assert duality_map(t * x, spec) == pytest.approx(t * duality_map(x, spec), rel=1e-9, abs=1e-12)


# --- Graph Points ---


def test_graph_point_validation_and_equality():
    a = GraphPoint([1, 2], [3, 4])
    assert a.dim == 2
    assert a == GraphPoint([1.0, 2.0], [3.0, 4.0])
    assert a != GraphPoint([1, 2], [3, 5])
    assert hash(a) == hash(GraphPoint([1, 2], [3, 4]))
    assert a.to_dict() == {"x": [1.0, 2.0], "v": [3.0, 4.0]}
    with pytest.raises(DimensionMismatchError):
        GraphPoint([1, 2], [3])


def test_graph_point_is_immutable():
    a = GraphPoint([1], [2])
    with pytest.raises(ValueError):
        a.x[0] = 5.0


# --- Shears ---


@settings(max_examples=100, deadline=None)
@given(norm_and_vector(), st.floats(min_value=-5, max_value=5))
def test_vertical_shear_round_trip(data, sigma):
    spec, x = data
    pt = GraphPoint(x, -x)
    back = shear_vertical(shear_vertical(pt, sigma, spec), -sigma, spec)
    assert back.x == pytest.approx(pt.x)
    assert back.v == pytest.approx(pt.v, rel=1e-9, abs=1e-9)


def test_transvection_maps_identity_graph_onto_resolvent_graph():
    """(x, x) goes to (2x, x) under sigma = 1: the graph of (I + I)^{-1}."""
    pt = shear_transvect(GraphPoint([3.0], [3.0]), 1.0)
    assert pt == GraphPoint([6.0], [3.0])
    assert inverse_shear_transvect(pt, 1.0) == GraphPoint([3.0], [3.0])


def test_transvection_needs_euclidean_norm():
    with pytest.raises(UnsupportedNormError):
        shear_transvect(GraphPoint([1], [1]), 1.0, NormSpec(3.0))
    with pytest.raises(BadParamsError):
        inverse_shear_transvect(GraphPoint([1], [1]), 0.0)


def test_sheared_region_membership():
    box = Box.around(GraphPoint([0], [0]), 1.0)
    assert in_sheared_region(GraphPoint([1], [2]), box, 1.0)
    assert not in_sheared_region(GraphPoint([1], [2]), box, 0.0)
    assert not in_sheared_region(GraphPoint([2], [2]), box, 1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.1, max_value=3.0))
def test_shear_makes_monotone_samples_strongly_monotone(sigma):
    """Phi_sigma carries a monotone sample into a sigma-strongly monotone one."""
    graph = builtin("normal_cone_halfline").sample_graph(Box.around(GraphPoint([0], [0]), 1.0), 5)
    sheared = SampledGraph.of([shear_vertical(p, sigma, NormSpec()) for p in graph])
    assert strong_modulus(sheared).moduli["sigma_hat"] >= sigma - 1e-9


@pytest.mark.parametrize(
    "name", ["abs_subdifferential", "relu_graph", "normal_cone_halfline", "truncated_identity", "singleton_graph"]
)
@pytest.mark.parametrize("sigma", [1, 2])
def test_transvection_maps_vertices_onto_shifted_inverse(name, sigma):
    """Delta_sigma sends the vertices of gph T exactly onto those of gph (T + sigma I)^{-1}."""
    op = builtin(name)

    def vertex_set(pieces):
        return {tuple(float(c) for c in z) for piece in pieces for z in piece.vertices}

    expected = set()
    for x0, v0 in vertex_set(op.polyhedral_pieces()):
        pt = shear_transvect(GraphPoint([x0], [v0]), sigma)
        expected.add((float(pt.x[0]), float(pt.v[0])))
    assert vertex_set(op_inverse(op_shift_J(op, sigma)).polyhedral_pieces()) == expected

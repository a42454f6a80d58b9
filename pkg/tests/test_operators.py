"""Tests for boxes, value sets and the operator families with their composites."""

import numpy as np
import pytest

from catalog.builtins import builtin, default_catalog
from core.errors import BadParamsError, DimensionMismatchError, EmptyGraphError
from core.normgeom import GraphPoint, NormSpec
from operators.box import Box
from operators.composite import op_inverse, op_localize, op_scale, op_shift_J, op_sum, qualification_report
from operators.normal_cone import NormalConeOp, ParabolaNormalCone
from operators.polyhedral import PolyhedralOp
from operators.polyhedron import Polyhedron
from operators.sampled import SampledGraph, SampledOp
from operators.smooth import SmoothMap
from operators.value_set import ValueSet

ORIGIN_1D = GraphPoint([0], [0])
ORIGIN_2D = GraphPoint([0, 0], [0, 0])


# --- Boxes ---


def test_box_membership_and_bounds():
    box = Box.around(ORIGIN_1D, 1.0, 2.0)
    assert box.contains(GraphPoint([1], [-2]))
    assert not box.interior(GraphPoint([1], [0]))
    assert not box.contains(GraphPoint([1.5], [0]))
    lo, hi = box.cube_bounds()
    assert np.allclose(lo, [-1, -2]) and np.allclose(hi, [1, 2])
    assert box.diameter == 4.0


def test_box_grid_includes_center():
    box = Box(np.array([0.1]), 1.0, np.array([0.0]), 1.0)
    grid = box.x_grid(5)
    assert np.allclose(grid[0], [0.1])
    assert len(grid) == 5


def test_box_rejects_bad_data():
    with pytest.raises(BadParamsError):
        Box.around(ORIGIN_1D, 0.0)
    with pytest.raises(DimensionMismatchError):
        Box(np.zeros(1), 1.0, np.zeros(2), 1.0)


def test_weighted_box_bounds():
    spec = NormSpec(2.0, (4.0, 1.0))
    box = Box.around(ORIGIN_2D, 1.0, 1.0, spec)
    lo, hi = box.x_bounds()
    assert np.allclose(hi, [0.5, 1.0])


# --- Value Sets ---


def test_value_set_points_and_slices():
    interval = Polyhedron.build([[1, 1], [-1, 0]], (), 1)
    values = ValueSet.of_slices([interval], 1).union(ValueSet.of_points([[5], [5.0]], 1))
    assert len(values.points) == 1
    assert values.contains([0.5]) and values.contains([5])
    assert not values.contains([2])
    assert values.distance([3]) == pytest.approx(2.0)
    assert values.interval() == (0.0, 5.0)


def test_value_set_minkowski_and_scaling():
    interval = ValueSet.of_slices([Polyhedron.build([[1, 1], [-1, 0]], (), 1)], 1)
    shifted = interval.minkowski(ValueSet.of_points([[2]], 1))
    assert shifted.interval() == (2.0, 3.0)
    assert interval.scaled(-2).interval() == (-2.0, 0.0)
    assert interval.scaled(0).is_single_point


def test_clipped_value_set():
    ray = ValueSet.of_slices([Polyhedron.build([[1, 0]], (), 1)], 1)
    clipped = ray.clipped([0], 1.0, NormSpec())
    assert clipped.interval() == (-1.0, 0.0)
    assert not clipped.contains([-2])
    assert ValueSet.empty(1).is_empty


# --- Operator Families ---


def test_polyhedral_from_rational_strings():
    op = PolyhedralOp.from_data([{"eqs": [["-1/2", 1, 0]]}], 1, "half")
    assert op.values_at([1]).contains([0.5])
    assert op.contains(GraphPoint([2], [1]))
    with pytest.raises(BadParamsError):
        PolyhedralOp.from_data([{"eqs": [[1, 0, 1], [1, 0, 2]]}], 1)


def test_affine_map_pieces():
    op = SmoothMap.from_coefficients(2, [[2, 0], [0, 5]])
    assert np.allclose(op.value([1, 1]), [2, 5])
    assert len(op.polyhedral_pieces()) == 1
    cubic = builtin("cubic")
    assert cubic.exact_pieces() is None


def test_halfline_normal_cone():
    op = NormalConeOp.halfline()
    assert op.values_at([0]).interval() == (-np.inf, 0.0)
    assert op.values_at([1]).is_single_point
    assert op.values_at([-1]).is_empty
    assert len(op.polyhedral_pieces()) == 2


def test_box_normal_cone_corner():
    op = NormalConeOp.box([-1, -1], [1, 1])
    values = op.values_at([1, 1])
    assert values.contains([1, 2])
    assert not values.contains([-1, 0])
    assert len(op.polyhedral_pieces()) == 9


def test_empty_set_rejected():
    with pytest.raises(BadParamsError):
        NormalConeOp(ineqs=[[1, -1], [-1, -1]], dim=1)


def test_parabola_normal_cone():
    op = ParabolaNormalCone()
    assert op.values_at([1, 1]).contains([2, -1])
    assert not op.values_at([1, 1]).contains([-2, 1])
    assert op.values_at([0, 1]).is_single_point
    assert op.values_at([0, -1]).is_empty
    assert op.exact_pieces() is None


def test_sampled_operator():
    op = SampledOp(SampledGraph.from_pairs([([0], [0]), ([1], [2]), ([1], [3])]))
    assert op.values_at([1]).contains([3])
    assert op.values_at([0.5]).is_empty
    assert len(op.sample_graph(Box.around(ORIGIN_1D, 5.0))) == 3


# --- Composites ---


def test_sum_and_qualification():
    """identity + N_[0,inf) takes (-inf, 0] at 0; the sum rule qualifies."""
    op = op_sum(builtin("identity"), NormalConeOp.halfline(), "sum")
    assert op.values_at([0]).interval() == (-np.inf, 0.0)
    assert op.values_at([1]).contains([1])
    report = qualification_report(op, Box.around(ORIGIN_1D, 1.0))
    assert report["holds"]
    with pytest.raises(DimensionMismatchError):
        op_sum(builtin("identity"), builtin("normal_cone_line"))


def test_example35_qualification_fails():
    """Neither domain meets the interior of the other: the line has no interior points in the parabola set."""
    report = qualification_report(builtin("example35_sum"), Box.around(ORIGIN_2D, 1.0))
    assert report["int_dom_second_empty"] is True
    assert report["int_dom_first_empty"] is False
    assert not report["holds"]


def test_inverse_shift_scale():
    double = builtin("linear", matrix=[[2]])
    assert op_inverse(double).values_at([4]).contains([2])
    assert op_inverse(op_inverse(double)).values_at([1]).contains([2])
    shifted = op_shift_J(double, 1.0)
    assert shifted.values_at([1]).contains([3])
    assert len(shifted.polyhedral_pieces()) == 1
    assert op_scale(double, -1).values_at([1]).contains([-2])
    assert op_scale(double, 0).values_at([1]).contains([0])


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
def test_shift_round_trip(sigma):
    """Shifting by sigma and then by -sigma gives back the same graph."""
    for name in ("relu_graph", "normal_cone_polyhedron", "identity_plus_halfline"):
        op = builtin(name)
        back = op_shift_J(op_shift_J(op, sigma), -sigma)
        assert [p.vrep for p in back.polyhedral_pieces()] == [p.vrep for p in op.polyhedral_pieces()]
    cubic = builtin("cubic")
    back = op_shift_J(op_shift_J(cubic, sigma), -sigma)
    for x in np.linspace(-1.0, 1.0, 9):
        (v,) = cubic.values_at([x]).extreme_points()
        (w,) = back.values_at([x]).extreme_points()
        assert np.allclose(w, v, rtol=0.0, atol=1e-12)


def _difference_cases():
    eye = [[1, 0], [0, 1]]
    return [
        pytest.param(("identity_plus_halfline", {}), ("identity", {}), ("normal_cone_halfline", {}), id="halfline"),
        pytest.param(("linear", {}), ("linear", {"matrix": eye}), ("linear", {"matrix": [[1, 0], [0, 4]]}), id="linear"),
    ]


@pytest.mark.parametrize("t, s, r", _difference_cases())
def test_graph_inclusion_through_differences(t, s, r):
    """dom T in dom S and gph(T - S) in gph R give gph T in gph(R + S)."""
    t, s, r = (builtin(name, **params) for name, params in (t, s, r))
    n = t.dim
    box = Box.around(GraphPoint(np.zeros(n), np.zeros(n)), 1.0)
    t_graph = t.sample_graph(box, 5)
    assert all(s.in_domain(p.x) for p in t_graph)
    difference = op_sum(t, op_scale(s, -1))
    assert all(r.contains(p, 1e-9) for p in difference.sample_graph(box, 5))
    total = op_sum(r, s)
    assert all(total.contains(p, 1e-9) for p in t_graph)


def test_localized_operator():
    box = Box.around(ORIGIN_1D, 0.5)
    op = op_localize(builtin("identity"), box)
    assert op.values_at([1]).is_empty
    assert op.values_at([0.25]).contains([0.25])
    assert op.localization_boxes() == [box]
    assert all(abs(p.x[0]) <= 0.5 for p in op.sample_graph(Box.around(ORIGIN_1D, 1.0)))


@pytest.mark.parametrize("name", ["identity", "relu_graph", "normal_cone_box", "cubic"])
def test_localized_sample_is_a_filtered_sample(name):
    op = builtin(name)
    n = op.dim
    center = GraphPoint(np.zeros(n), np.zeros(n))
    outer = Box.around(center, 1.0)
    inner = Box.around(center, 0.5, 0.25)
    local = op_localize(op, inner).sample_graph(outer, 5)
    assert set(local) == {p for p in op.sample_graph(outer, 5) if inner.contains(p, 1e-12)}


def _catalog_boxes():
    return [
        pytest.param(entry.name, i, id=f"{entry.name}[{i}]")
        for entry in default_catalog().get_all_entries()
        for i in range(len(entry.references))
    ]


@pytest.mark.parametrize("name, index", _catalog_boxes())
def test_sample_points_lie_on_the_graph(name, index):
    """Every sampled point is confirmed by evaluating the operator at its x."""
    ref = default_catalog().get_entry(name).references[index]
    op = builtin(name)
    box = Box.around(ref.point, ref.x_radius, ref.v_radius)
    for p in op.sample_graph(box, 5):
        assert op.values_at(p.x, 1e-9).distance(p.v) <= 1e-9, p


# --- Sampling ---


def test_identity_sample_lies_on_the_diagonal():
    graph = builtin("identity").sample_graph(Box.around(ORIGIN_1D, 1.0), 5)
    assert all(p.x[0] == pytest.approx(p.v[0]) for p in graph)
    assert GraphPoint([1], [1]) in list(graph)
    assert GraphPoint([-1], [-1]) in list(graph)


def test_sampling_errors():
    op = builtin("identity")
    with pytest.raises(BadParamsError):
        op.sample_graph(Box.around(ORIGIN_1D, 1.0), 1)
    gap = builtin("truncated_identity", gap=[-2, 2])
    with pytest.raises(EmptyGraphError):
        gap.sample_graph(Box.around(ORIGIN_1D, 1.0))

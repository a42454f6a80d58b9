"""Tests for scene parsing and formatting, report assembly and serialization, plots and the CLI."""

import json

import pytest

import monolab
from core.errors import SceneError
from core.report import emit_report, run_analyses
from core.scene import ANALYSIS_KEYS, format_scene, parse_scene
from operators.box import Box
from core.normgeom import GraphPoint
from catalog.builtins import builtin
from utils.svg_plot import render_plot
from core.errors import UnsupportedDimensionError

MINIMAL = """
[operator T]
catalog = "identity"

[analysis]
monotone_witness op=T point=[[0], [0]]
"""

EXAMPLE35 = """
# the counterexample
[norm]
p = 2

[operator T1]
catalog = "normal_cone_parabola"

[operator T2]
catalog = "normal_cone_line"

[operator T]
sum = ["T1", "T2"]

[analysis]
typeA_witness_search op=T point=[[0, 0], [0, 0]] radius=1
psd_criterion op=T point=[[0, 0], [0, 0]] radius=1
"""


# --- Parsing ---


def test_parse_minimal_scene():
    """One catalog operator and one request."""
    scene = parse_scene(MINIMAL)
    assert list(scene.operators) == ["T"]
    assert len(scene.requests) == 1
    req = scene.requests[0]
    assert req.operation == "monotone_witness"
    assert req.point == GraphPoint([0], [0])
    assert scene.operator("T").name == "T"


def test_parse_example35_scene():
    scene = parse_scene(EXAMPLE35)
    assert len(scene.operators) == 3
    assert [r.operation for r in scene.requests] == ["typeA_witness_search", "psd_criterion"]
    assert scene.operators["T"].kind == "sum"


def test_unknown_operator_is_named():
    """A request on an undefined operator reports UNKNOWN_OPERATOR with its name and position."""
    text = MINIMAL.replace("op=T", "op=T9")
    with pytest.raises(SceneError) as info:
        parse_scene(text)
    assert info.value.code == "UNKNOWN_OPERATOR"
    assert "T9" in str(info.value)
    assert info.value.line == 6
    assert info.value.column == len("monotone_witness op=") + 1


def test_dimension_mismatch():
    text = MINIMAL.replace("point=[[0], [0]]", "point=[[0, 0], [0, 0]]")
    with pytest.raises(SceneError) as info:
        parse_scene(text)
    assert info.value.code == "DIMENSION_MISMATCH"

    summed = """
[operator A]
catalog = "identity"
[operator B]
catalog = "normal_cone_line"
[operator C]
sum = ["A", "B"]
"""
    with pytest.raises(SceneError) as info:
        parse_scene(summed)
    assert info.value.code == "DIMENSION_MISMATCH"
    assert info.value.line == 7


def test_parse_errors_carry_positions():
    """Bad JSON, unknown analyses and stray text are PARSE_ERRORs at their line."""
    with pytest.raises(SceneError) as info:
        parse_scene("[operator T]\ncatalog = identity\n")
    assert info.value.code == "PARSE_ERROR"
    assert info.value.line == 2
    assert info.value.column == len("catalog = ") + 1

    with pytest.raises(SceneError, match="Did you mean: monotone_witness"):
        parse_scene(MINIMAL.replace("monotone_witness", "monotone_witnes"))

    with pytest.raises(SceneError, match="before the first"):
        parse_scene("p = 2\n")

    with pytest.raises(SceneError, match="does not take 'sigma'"):
        parse_scene(MINIMAL.replace("[0]]", "[0]] sigma=1"))


def test_unknown_catalog_name():
    with pytest.raises(SceneError) as info:
        parse_scene(MINIMAL.replace('"identity"', '"identiy"'))
    assert info.value.code == "UNKNOWN_NAME"


def test_inline_and_composite_operators():
    """Inline data and every composite kind build."""
    text = """
[norm]
p = 2

[operator P]
polyhedral = {"dim": 1, "pieces": [{"eqs": [[-1, 1, 0]]}]}

[operator S]
sampled = [[[0], [0]], [[1], [2]]]

[operator I]
inverse = "P"

[operator H]
shift = {"of": "P", "sigma": 1}

[operator K]
scale = {"of": "P", "factor": 2}

[operator L]
localize = {"of": "P", "point": [[0], [0]], "radius": 0.5}

[operator C]
catalog = "truncated_identity"
params = {"gap": [0, 1]}
"""
    scene = parse_scene(text)
    assert scene.operator("H").values_at([2]).contains([4])
    assert scene.operator("K").values_at([1]).contains([2])
    assert scene.operator("S").values_at([1]).contains([2])
    assert scene.operator("C").values_at([0.5]).is_empty


def test_format_parse_fixed_point():
    """parse -> format -> parse -> format is stable."""
    for text in (MINIMAL, EXAMPLE35):
        once = format_scene(parse_scene(text))
        assert format_scene(parse_scene(once)) == once


# --- Reports ---


def test_identity_monotone_report():
    report = run_analyses(parse_scene(MINIMAL))
    assert report.statuses() == ["PASS"]
    assert report.exit_code() == 0


def test_empty_scene_report():
    """A scene without requests serializes the schema and an empty request list."""
    data = json.loads(emit_report(run_analyses(parse_scene("[norm]\np = 2\n"))))
    assert data["schema"] == "monolab-report/1"
    assert data["requests"] == []
    assert "wall_clock_seconds" not in data


def test_example35_report_witnesses():
    """Both counterexample requests fail with re-validated witnesses."""
    report = run_analyses(parse_scene(EXAMPLE35))
    assert report.statuses() == ["FAIL", "FAIL"]
    typeA, psd = report.records
    assert typeA["revalidated"] and psd["revalidated"]
    point = typeA["verdict"]["witness"]["points"][0]
    assert point["x"] == [0.5, 0.0]
    assert point["v"] == [0.0, 0.0]
    witness = psd["verdict"]["witness"]
    assert witness["value"] == pytest.approx(-1.0)
    assert witness["w"] == pytest.approx([1.0, 0.0])


def test_lambda_sweep_on_halfline():
    text = """
[operator N]
catalog = "normal_cone_halfline"
[analysis]
minty_sweep op=N point=[[0], [0]] lambdas=[0.5, 1, 2]
"""
    record = run_analyses(parse_scene(text)).records[0]
    assert record["status"] == "PASS"
    parts = record["verdict"]["details"]
    assert [parts[k]["status"] for k in ("lambda=0.5", "lambda=1", "lambda=2")] == ["PASS"] * 3


def test_request_errors_are_recorded():
    """A point off the graph is an ERROR record; the run goes on."""
    text = MINIMAL + "minty_local_probe op=T point=[[0], [1]]\n"
    report = run_analyses(parse_scene(text))
    assert report.statuses() == ["PASS", "ERROR"]
    assert report.records[1]["error"]["code"] == "POINT_NOT_IN_SET"
    assert report.exit_code() == 0


def test_report_serialization_is_canonical():
    """Identical scene and seed give byte-identical reports with sorted keys and 17-digit floats."""
    scene = parse_scene(EXAMPLE35)
    first = emit_report(run_analyses(scene, seed=0))
    second = emit_report(run_analyses(parse_scene(EXAMPLE35), seed=0))
    assert first == second
    data = json.loads(first)
    assert list(data) == sorted(data)
    assert data["scene_sha256"] and len(data["scene_sha256"]) == 64
    assert "0.10000000000000001" in emit_report(_report_with_value(0.1))


def _report_with_value(x: float):
    from core.report import Report

    return Report("0" * 64, records=[{"value": x, "status": "PASS"}])


def test_every_analysis_has_a_handler():
    from core.report import AnalysisRunner

    runner = AnalysisRunner(parse_scene(MINIMAL))
    assert set(runner._handlers) == set(ANALYSIS_KEYS)


# --- Plots ---


def test_identity_plot_is_one_segment():
    op = builtin("identity")
    svg = render_plot(op, Box.around(GraphPoint([0], [0]), 1.0))
    graph = svg.split('<g id="graph"')[1].split("</g>")[0]
    assert graph.count("<line") == 1
    assert svg.startswith('<?xml version="1.0"')
    assert 'width="800" height="600"' in svg


def test_halfline_plot_has_two_rays():
    svg = render_plot(builtin("normal_cone_halfline"), Box.around(GraphPoint([0], [0]), 1.0))
    graph = svg.split('<g id="graph"')[1].split("</g>")[0]
    assert graph.count("<line") == 2


def test_shear_overlay_and_determinism():
    """The sheared identity is a second segment of slope 2; output is reproducible."""
    op = builtin("identity")
    box = Box.around(GraphPoint([0], [0]), 1.0, 2.0)
    svg = render_plot(op, box, shear=1.0)
    assert svg == render_plot(op, box, shear=1.0)
    sheared = svg.split('<g id="shear"')[1].split("</g>")[0]
    assert sheared.count("<line") == 1


def test_plot_rejects_higher_dimensions():
    with pytest.raises(UnsupportedDimensionError):
        render_plot(builtin("normal_cone_line"), Box.around(GraphPoint([0, 0], [0, 0]), 1.0))


# --- CLI ---


def test_cli_run_writes_report_and_plots(tmp_path):
    scene = tmp_path / "identity.scene"
    scene.write_text(MINIMAL)
    out = tmp_path / "report.json"
    plots = tmp_path / "plots"
    code = monolab.main(["run", str(scene), "--out", str(out), "--plot", str(plots)])
    assert code == 0
    assert json.loads(out.read_text())["requests"][0]["status"] == "PASS"
    assert (plots / "T.svg").exists()


def test_cli_parse_error_exit_code(tmp_path, capsys):
    scene = tmp_path / "bad.scene"
    scene.write_text(MINIMAL.replace("op=T", "op=T9"))
    assert monolab.main(["run", str(scene)]) == 1
    assert "UNKNOWN_OPERATOR" in capsys.readouterr().err


def test_cli_unreadable_scene_exit_code(tmp_path, capsys):
    scene = tmp_path / "latin1.scene"
    scene.write_bytes(MINIMAL.encode("utf-8") + b"# caf\xe9\n")
    assert monolab.main(["run", str(scene)]) == 1
    assert "cannot read scene" in capsys.readouterr().err
    assert monolab.main(["run", str(tmp_path / "missing.scene")]) == 1


def test_cli_timing_adds_wall_clock(tmp_path):
    scene = tmp_path / "s.scene"
    scene.write_text(MINIMAL)
    out = tmp_path / "r.json"
    assert monolab.main(["run", str(scene), "--out", str(out), "--timing"]) == 0
    assert json.loads(out.read_text())["wall_clock_seconds"] >= 0


def test_cli_catalog(capsys):
    assert monolab.main(["catalog", "list"]) == 0
    assert "example35_sum" in capsys.readouterr().out
    assert monolab.main(["catalog", "show", "identity"]) == 0
    assert json.loads(capsys.readouterr().out)["name"] == "identity"
    assert monolab.main(["catalog", "show", "identiy"]) == 1

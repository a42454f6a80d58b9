"""
End-to-end checks: every catalog reference through both local-maximality routes,
and the acceptance scene through the command line.
"""

import os

import pytest

from catalog.builtins import default_catalog
from core.report import run_analyses
from core.scene import parse_scene
from tests.test_lib import AnalysisHarness

ACCEPTANCE_SCENE = os.path.join(os.path.dirname(__file__), "..", "data", "scenes", "acceptance.scene")

pytestmark = pytest.mark.integration


def _reference_cases():
    cases = []
    for entry in default_catalog().get_all_entries():
        for i, ref in enumerate(entry.references):
            for analysis, status in sorted(ref.expected.items()):
                cases.append(pytest.param(entry.name, i, analysis, status, id=f"{entry.name}[{i}]-{analysis}"))
    return cases


def _point_literal(values) -> str:
    return "[" + ", ".join(repr(float(v)) for v in values) + "]"


@pytest.fixture
def harness():
    h = AnalysisHarness()
    h.setup()
    yield h
    h.teardown()


# --- Catalog References ---


@pytest.mark.parametrize("name, index, analysis, status", _reference_cases())
def test_catalog_reference(name, index, analysis, status):
    """The recorded ground truth of each reference point is reproduced by a scene run."""
    ref = default_catalog().get_entry(name).references[index]
    point = f"[{_point_literal(ref.point.x)}, {_point_literal(ref.point.v)}]"
    text = (
        f'[operator T]\ncatalog = "{name}"\n\n[analysis]\n'
        f"{analysis} op=T point={point} x_radius={ref.x_radius} v_radius={ref.v_radius}\n"
    )
    (record,) = run_analyses(parse_scene(text)).records
    if status == "UNSUPPORTED":
        assert record["status"] == "ERROR"
        assert record["error"]["code"].startswith("UNSUPPORTED")
    else:
        assert record["status"] == status, record.get("verdict", record.get("error"))


def test_reference_moduli():
    """Expected strong moduli match the sampled estimate at the same reference."""
    for entry in default_catalog().get_all_entries():
        for ref in entry.references:
            if "sigma_hat" not in ref.moduli:
                continue
            point = f"[{_point_literal(ref.point.x)}, {_point_literal(ref.point.v)}]"
            text = (
                f'[operator T]\ncatalog = "{entry.name}"\n\n[analysis]\n'
                f"strong_modulus op=T point={point} x_radius={ref.x_radius} v_radius={ref.v_radius}\n"
            )
            (record,) = run_analyses(parse_scene(text)).records
            assert record["verdict"]["moduli"]["sigma_hat"] == pytest.approx(ref.moduli["sigma_hat"], abs=1e-6), entry.name


# --- Acceptance Scene ---


def test_acceptance_scene(harness):
    code = harness.run_scene(ACCEPTANCE_SCENE)
    assert code in (0, 2)
    records = harness.records()
    assert not {"ERROR", "INTERNAL_ERROR"} & set(harness.statuses())

    def status(index: int) -> str:
        return records[index]["status"]

    assert status(0) == "PASS" and status(1) == "PASS"
    assert status(2) == "FAIL" and status(3) == "FAIL"
    assert status(19) == "FAIL"
    assert status(20) == "FAIL"
    qualification = records[21]
    assert qualification["operation"] == "qualification_report"
    assert qualification["value"]["holds"] is False
    assert records[22]["value"]["sigma_sup"] == pytest.approx(2.0, abs=1e-6)
    assert records[23]["verdict"]["moduli"]["sigma_hat"] == pytest.approx(2.0, abs=1e-9)


def test_shifted_inverse_lipschitz(harness):
    """For T = -0.5 x, (T + sigma I)^{-1} is Lipschitz with constant 1 / (sigma - 0.5)."""
    harness.run_scene(ACCEPTANCE_SCENE)
    sigma_one, sigma_two = harness.records()[24], harness.records()[25]
    assert sigma_one["status"] == "PASS" and sigma_two["status"] == "PASS"
    assert sigma_one["verdict"]["moduli"]["lipschitz"] == pytest.approx(2.0)
    assert sigma_two["verdict"]["moduli"]["lipschitz"] == pytest.approx(2.0 / 3.0)


def test_every_witness_revalidates(harness):
    harness.run_scene(ACCEPTANCE_SCENE)
    for rec in harness.records():
        if rec["status"] == "FAIL":
            assert rec["revalidated"] is True, rec["operation"]


def test_plots_and_determinism(harness):
    """Two runs with the same seed give byte-identical reports; one-dimensional operators get plots."""
    harness.run_scene(ACCEPTANCE_SCENE, plots=True)
    first = harness.report
    assert "identity.svg" in harness.plots()
    assert "example35.svg" not in harness.plots()
    harness.run_scene(ACCEPTANCE_SCENE)
    assert harness.report == first


def test_parse_error_exit_code(harness):
    path = harness.write_scene("[operator T]\ncatalog = \"identity\"\n\n[analysis]\nmonotone_witnes op=T point=[[0], [0]]\n")
    assert harness.run_scene(path) == 1
    assert harness.report is None


# --- Route Agreement ---


def test_recorded_routes_agree():
    """Wherever both routes have ground truth, the resolvent and coderivative verdicts coincide."""
    compared = 0
    for entry in default_catalog().get_all_entries():
        for ref in entry.references:
            minty = ref.expected.get("minty_local_probe")
            coderivative = ref.expected.get("local_max_via_coderivative")
            if minty is None or coderivative in (None, "UNSUPPORTED"):
                continue
            assert minty == coderivative, f"{entry.name} at {ref.point}"
            compared += 1
    assert compared >= 30


def _reference_points():
    return [
        pytest.param(entry.name, i, id=f"{entry.name}[{i}]")
        for entry in default_catalog().get_all_entries()
        for i in range(len(entry.references))
    ]


@pytest.mark.parametrize("name, index", _reference_points())
def test_extension_search_never_contradicts_minty(name, index):
    """A type-(A) extension point and a certifying Minty probe exclude each other."""
    ref = default_catalog().get_entry(name).references[index]
    point = f"[{_point_literal(ref.point.x)}, {_point_literal(ref.point.v)}]"
    box = f"x_radius={ref.x_radius} v_radius={ref.v_radius}"
    text = (
        f'[operator T]\ncatalog = "{name}"\n\n[analysis]\n'
        f"typeA_witness_search op=T point={point} {box}\n"
        f"minty_local_probe op=T point={point} {box}\n"
    )
    search, minty = run_analyses(parse_scene(text)).records
    if search["status"] == "FAIL":
        assert search["revalidated"] is True
        assert minty["status"] != "PASS", search["verdict"]["witness"]


@pytest.mark.parametrize("name", ["identity", "normal_cone_halfline"])
def test_resolvent_of_monotone_shift_is_nonexpansive(name):
    """(T + I)^{-1} of a maximal monotone T is 1-Lipschitz."""
    text = f'[operator T]\ncatalog = "{name}"\n\n[analysis]\nlocalization_lipschitz op=T point=[[0], [0]] sigma=1\n'
    (record,) = run_analyses(parse_scene(text)).records
    assert record["status"] == "PASS"
    assert record["verdict"]["moduli"]["lipschitz"] <= 1.0 + 1e-6

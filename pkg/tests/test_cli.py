import csv
import io
import json
import math

import pytest

from lyapunov_bvp.cli import run


def call(argv):
    out = io.StringIO()
    code = run(argv, stream=out)
    return code, out.getvalue()


def test_constants_example():
    code, out = call(["constants", "--problem", "periodic-l1", "--n", "1", "--T", "3.141592653589793"])
    assert code == 0
    rep = json.loads(out)
    assert rep["result"]["value"] == pytest.approx(4 * math.pi + 16)
    assert rep["schema"] == "lyapunov-bvp/1"
    assert rep["version"]
    assert rep["config"]["n"] == 1


def test_certify_hill_constant(tmp_path):
    p = tmp_path / "mathieu.json"
    p.write_text(json.dumps({"kind": "constant", "value": 5, "T": math.pi}))
    code, out = call(["certify", "hill", "--input", str(p)])
    assert code == 0
    res = json.loads(out)["result"]
    assert res["verdict"] == "Certified"
    assert res["oracle_crosscheck"]["detail"]["verdict"]["class"] == "Stable"


def test_not_certified_is_exit_zero(tmp_path):
    p = tmp_path / "a.json"
    p.write_text(json.dumps({"kind": "piecewise", "breakpoints": [0, math.pi / 2, math.pi],
                             "values": [16.5, 40], "T": "pi"}))
    code, out = call(["certify", "hill", "--input", str(p)])
    assert code == 0
    assert json.loads(out)["result"]["verdict"].startswith("NotCertified")


def test_sweep_writes_svg_and_csv(tmp_path):
    svg = tmp_path / "chart.svg"
    code, _ = call(["sweep", "--alpha", "0:4:64", "--beta", "0:2:64", "--T", "6.2832",
                    "--out", str(svg)])
    assert code == 0
    assert svg.read_text().lstrip().startswith("<?xml")
    rows = list(csv.reader((tmp_path / "chart.csv").read_text().splitlines()))
    assert rows[0][0].startswith("# schema=")
    assert rows[1] == ["alpha", "beta", "class", "detail"]
    assert len(rows) - 2 == 4096


def test_reports_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run(["minimize", "--p", "3", "--mesh", "128", "--seed", "4", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_input_errors_exit_2(tmp_path):
    assert call(["certify", "hill", "--input", str(tmp_path / "missing.json")])[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert call(["spectrum", "--input", str(bad)])[0] == 2
    assert call(["constants", "--problem", "nonsense"])[0] == 2
    other = tmp_path / "T2.json"
    other.write_text(json.dumps({"kind": "constant", "value": 5, "T": 2}))
    assert call(["certify", "hill", "--input", str(other)])[0] == 2


def test_numerical_failure_exit_3(tmp_path):
    prob = tmp_path / "res.json"
    prob.write_text(json.dumps({"domain": {"kind": "interval", "length": 1}, "h": 1 / 64,
                                "nonlinearity": {"kind": "linear", "b": [0.0], "forcing": [1.0]}}))
    assert call(["resonant", "--input", str(prob), "--force"])[0] == 3


def test_resonant_outputs(tmp_path):
    prob = tmp_path / "res.json"
    prob.write_text(json.dumps({
        "domain": {"kind": "interval", "length": 1}, "h": 1 / 128,
        "nonlinearity": {"kind": "saturated",
                         "b": [{"kind": "fourier", "a0": 4.9348, "cos": [1.9739], "T": 1}],
                         "forcing": [{"kind": "fourier", "cos": [0.3], "T": 1}]}}))
    csv_path, svg = tmp_path / "u.csv", tmp_path / "u.svg"
    code, out = call(["resonant", "--input", str(prob), "--newton", "--csv", str(csv_path),
                      "--plot", str(svg)])
    assert code == 0
    res = json.loads(out)["result"]
    assert res["verdict"] == "Certified"
    assert res["newton"]["max_difference"] < 1e-8
    assert csv_path.exists() and svg.exists()


def test_pde_detect_from_field_csv(tmp_path):
    from lyapunov_bvp.coeffs import SpatialCoefficient2D
    from lyapunov_bvp.grids import Interval, build_grid
    from lyapunov_bvp.io import write_field_csv

    dom, h = Interval(1.0), 1 / 64
    path = tmp_path / "a.csv"
    write_field_csv(path, SpatialCoefficient2D(dom, h, [1.0] * build_grid(dom, h).n))
    code, out = call(["pde", "detect", "--domain", "interval:1", "--h", str(h), "--input", str(path)])
    assert code == 0
    assert json.loads(out)["result"]["verdict"] == "only_trivial"


def test_spectrum_csv_and_plot(tmp_path):
    p = tmp_path / "a.json"
    p.write_text(json.dumps({"kind": "fourier", "a0": 1, "cos": [0.5], "T": "2pi"}))
    out_csv, fig = tmp_path / "s.csv", tmp_path / "d.svg"
    code, _ = call(["spectrum", "--input", str(p), "--format", "csv", "--out", str(out_csv),
                    "--plot", str(fig)])
    assert code == 0
    lines = out_csv.read_text().splitlines()
    assert lines[1] == "boundary,index,value,multiplicity"
    assert len(lines) == 2 + 12
    assert fig.exists()


def test_selftest_single_criterion(tmp_path):
    out = tmp_path / "self.json"
    assert run(["selftest", "--only", "1", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["result"]["passed"] == 1


def test_help_documents_schema(capsys):
    assert run(["--help"]) == 0
    text = capsys.readouterr().out
    assert "Problem files" in text and "fourier" in text

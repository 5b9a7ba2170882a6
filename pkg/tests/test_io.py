import json
import math
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lyapunov_bvp.coeffs import Constant, Fourier, PiecewiseConstant, SampledGrid, SpatialCoefficient2D
from lyapunov_bvp.grids import Disc, Interval, Rectangle, build_grid
from lyapunov_bvp.io import (InputError, csv_text, dumps_json, parse_coefficient, parse_field,
                             parse_float, parse_matrix, parse_nonlinearity, read_field_csv,
                             write_field_csv)


def test_parse_float_words():
    assert parse_float("inf") == math.inf
    assert parse_float("pi") == math.pi
    assert parse_float("2pi") == 2 * math.pi
    with pytest.raises(InputError):
        parse_float("abc")


@pytest.mark.parametrize("coef", [
    Constant(5.0, math.pi),
    Fourier(1.0, ((0.5, 0.1), (0.0, -0.2)), 2.0),
    PiecewiseConstant((0.0, 0.5, 2.0), (3.0, -1.0), 2.0),
    SampledGrid((1.0, 2.0, 0.5), 1.5),
])
def test_coefficient_round_trip(coef):
    again = parse_coefficient(json.loads(json.dumps(coef.to_dict())))
    t = np.linspace(0, coef.T, 17)
    assert np.allclose(again(t), coef(t))
    assert again.T == coef.T


def test_coefficient_errors():
    with pytest.raises(InputError):
        parse_coefficient({"kind": "wave", "T": 1})
    with pytest.raises(InputError):
        parse_coefficient({"kind": "fourier", "cos": [1], "sin": [1, 2], "T": 1})
    with pytest.raises(InputError):
        parse_coefficient({"kind": "constant", "T": 1})
    with pytest.raises(InputError):
        parse_coefficient(3.0)


def test_matrix_with_numbers():
    m = parse_matrix({"kind": "matrix", "T": 2.0, "entries": [[1, 0.5], [0.5, {"kind": "constant", "value": 2}]]})
    assert m.n == 2 and m.T == 2.0


def test_field_forms():
    dom, h = Rectangle(1.0, 1.0), 1 / 32
    n = build_grid(dom, h).n
    assert parse_field(2.0, dom, h).values.shape == (n,)
    assert parse_field([[1, 0], [0, 2]], dom, h).values.shape == (n, 2, 2)
    cos = parse_field({"kind": "cosine", "offset": 1, "amplitude": 2, "wavenumbers": [math.pi, 0]}, dom, h)
    assert cos.values.max() == pytest.approx(3.0)
    with pytest.raises(InputError):
        parse_field({"kind": "matrix", "entries": [[1, 2], [3, 1]]}, dom, h)


def test_nonlinearity_with_csv_table():
    csv = "u,gu,guu\n-1,-1,1\n0,0,1\n1,1,1\n"
    spec = parse_nonlinearity({"kind": "custom", "b": [1.0], "table": {"csv": csv}}, Interval(1.0))
    assert spec.kind == "custom" and spec.table.consistency() < 1e-12


def test_json_is_deterministic_and_finite():
    text = dumps_json({"b": math.inf, "a": np.float64(1.5), "c": np.arange(3)})
    assert text == dumps_json({"c": [0, 1, 2], "a": 1.5, "b": math.inf})
    assert json.loads(text)["b"] == "inf"


def test_csv_header():
    lines = csv_text(["x", "y"], [(1.0, 2)]).splitlines()
    assert lines[0].startswith("# schema=")
    assert lines[1] == "x,y"


@pytest.mark.parametrize("domain,h,shape", [(Interval(2.0), 1 / 16, ()), (Rectangle(1.0, 1.0), 1 / 32, (2, 2)),
                                            (Disc(1.0), 1 / 16, ())])
def test_field_csv_round_trip(tmp_path, domain, h, shape):
    n = build_grid(domain, h).n
    vals = np.random.default_rng(1).standard_normal((n,) + shape)
    if shape:
        vals = vals + np.swapaxes(vals, 1, 2)
    f = SpatialCoefficient2D(domain, h, vals)
    path = tmp_path / "field.csv"
    write_field_csv(path, f)
    header = path.read_text().splitlines()[0]
    assert "rows=" in header and "cols=" in header and "domain=" in header
    g = read_field_csv(path)
    assert g.domain == domain and g.h == h
    assert np.array_equal(g.values, f.values)


def test_field_csv_rejects_mismatch(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text('# domain={"kind":"interval","length":1} h=0.25 rows=2 cols=2\n0,1\n1,2\n')
    with pytest.raises(InputError):
        read_field_csv(path)


@settings(max_examples=30, deadline=None)
@given(st.floats(-1e6, 1e6), st.lists(st.floats(-10, 10), min_size=1, max_size=4), st.floats(0.1, 10))
def test_fourier_dict_round_trip(a0, cos, T):
    f = Fourier(a0, tuple((c, -c / 2) for c in cos), T)
    g = parse_coefficient(f.to_dict())
    assert g(0.3 * T) == pytest.approx(f(0.3 * T), rel=1e-12, abs=1e-9)

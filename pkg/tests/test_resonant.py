import math

import numpy as np
import pytest

from lyapunov_bvp.coeffs import Fourier
from lyapunov_bvp.errors import NearSingular
from lyapunov_bvp.grids import Interval, Rectangle, build_grid
from lyapunov_bvp.resonant import (CustomTable, NonlinearitySpec, check_hypotheses, newton_solve,
                                   solve, uniqueness_probe)


def blend(scale=0.5, T=1.0):
    lam = (math.pi / T) ** 2
    b = Fourier(scale * lam, ((0.2 * lam, 0.0),), T)
    f = Fourier(0.0, ((0.3, 0.0),), T)
    return NonlinearitySpec("saturated", b=(b,), forcing=(f,))


def test_blend_is_certified_and_solved():
    dom, h = Interval(1.0), 1 / 256
    spec = blend()
    assert check_hypotheses(spec, dom, h).certified
    sol = solve(spec, dom, h)
    assert sol.converged and sol.residual < 1e-9
    nw = newton_solve(spec, dom, h)
    assert np.abs(sol.u - nw.u).max() < 1e-8


def test_blend_above_bound_not_certified():
    rep = check_hypotheses(blend(scale=1.2), Interval(1.0), 1 / 256)
    assert not rep.certified


def test_linear_unforced_has_zero_solution():
    dom, h = Interval(1.0), 1 / 128
    spec = NonlinearitySpec("linear", b=(2.0,))
    sol = solve(spec, dom, h)
    assert np.abs(sol.u).max() < 1e-12


def test_resonant_linear_is_refused():
    dom, h = Interval(1.0), 1 / 64
    spec = NonlinearitySpec("linear", b=(0.0,), forcing=(1.0,))
    with pytest.raises(NearSingular):
        solve(spec, dom, h)


def test_uniqueness_probe():
    dom, h = Interval(1.0), 1 / 128
    rep = uniqueness_probe(blend(), dom, h, starts=4, seed=3)
    assert rep.accepted and rep.spread < 1e-9
    bad = uniqueness_probe(blend(scale=1.2), dom, h, starts=2)
    assert not bad.accepted


def test_custom_table_matches_analytic():
    u = np.linspace(-8, 8, 801)
    b = 3.0
    table = CustomTable(tuple(u), tuple(b * (u + np.tanh(u)) / 2),
                        tuple(b * (1 + 1 / np.cosh(u) ** 2) / 2))
    f = Fourier(0.0, ((0.2, 0.0),), 1.0)
    dom, h = Interval(1.0), 1 / 128
    custom = NonlinearitySpec("custom", b=(b,), forcing=(f,), table=table)
    exact = NonlinearitySpec("saturated", b=(b,), forcing=(f,))
    assert check_hypotheses(custom, dom, h).certified
    uc = solve(custom, dom, h).u
    ue = solve(exact, dom, h).u
    assert np.abs(uc - ue).max() < 1e-4


def test_two_component_system():
    dom, h = Rectangle(1.0, 1.0), 1 / 32
    spec = NonlinearitySpec("saturated", b=(3.0, 2.0), coupling=((0.0, 0.5), (0.5, 0.0)),
                            forcing=(0.2, -0.1))
    rep = check_hypotheses(spec, dom, h)
    assert rep.certified
    sol = solve(spec, dom, h)
    assert sol.u.shape == (build_grid(dom, h).n, 2)
    assert sol.residual < 1e-9
    nw = newton_solve(spec, dom, h)
    assert np.abs(sol.u - nw.u).max() < 1e-8

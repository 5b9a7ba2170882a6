import math

import numpy as np
import pytest
from scipy.special import jnp_zeros

from lyapunov_bvp.errors import NearSingular
from lyapunov_bvp.grids import Disc, Interval, Rectangle, build_grid
from lyapunov_bvp.pde import (Nontriviality, detect_nontrivial, mean_nonnegativity_counterexample,
                              neumann_lambda1, solve_linear_neumann)


def test_interval_lambda1_converges_at_second_order():
    L = 2.0
    exact = (math.pi / L) ** 2
    e1 = abs(neumann_lambda1(Interval(L), L / 64) - exact)
    e2 = abs(neumann_lambda1(Interval(L), L / 128) - exact)
    assert e2 < e1 / 3.5


def test_rectangle_lambda1():
    lam = neumann_lambda1(Rectangle(2.0, 1.0), 1 / 32)
    assert lam == pytest.approx((math.pi / 2) ** 2, rel=5e-3)


def test_disc_lambda1():
    lam = neumann_lambda1(Disc(1.0), 1 / 64)
    assert lam == pytest.approx(float(jnp_zeros(1, 1)[0]) ** 2, rel=1e-2)


def test_coarse_grid_rejected():
    with pytest.raises(ValueError):
        neumann_lambda1(Rectangle(1.0, 1.0), 1 / 8)


def test_detect_nontrivial_three_ways():
    dom, h = Interval(1.0), 1 / 64
    lam1 = neumann_lambda1(dom, h)
    assert detect_nontrivial(dom, lam1, h).verdict is Nontriviality.NONTRIVIAL
    assert detect_nontrivial(dom, 0.5 * lam1, h).verdict is Nontriviality.ONLY_TRIVIAL
    assert detect_nontrivial(dom, 0.0, h).verdict is Nontriviality.NONTRIVIAL


def test_solve_sign_convention():
    dom, h = Rectangle(1.0, 1.0), 1 / 32
    n = build_grid(dom, h).n
    u = solve_linear_neumann(dom, -1.0, np.ones(n), h)
    assert np.allclose(u, -1.0)


def test_solve_manufactured_interval():
    dom, h = Interval(1.0), 1 / 256
    grid = build_grid(dom, h)
    x = grid.coords[:, 0]
    ue = np.cos(math.pi * x)
    a = -1.0
    g = -math.pi**2 * ue + a * ue
    u = solve_linear_neumann(dom, a, g, h)
    assert np.abs(u - ue).max() < 1e-4


def test_solve_eigenfunction_forcing():
    dom, h = Rectangle(1.0, 1.0), 1 / 32
    grid = build_grid(dom, h)
    lam = neumann_lambda1(dom, h)
    g = np.cos(math.pi * grid.coords[:, 0])
    # g is (up to discretisation) the first eigenfunction: u = -g / (0.5 lam)
    u = solve_linear_neumann(dom, 0.5 * lam, g, h)
    assert np.allclose(u, -g / (0.5 * lam), atol=2e-3 * np.abs(u).max())


def test_solve_residual_random_coefficient(rng):
    dom, h = Rectangle(1.0, 1.0), 1 / 32
    grid = build_grid(dom, h)
    a = 2.0 + np.cos(2 * grid.coords[:, 0]) * np.sin(3 * grid.coords[:, 1])
    g = rng.standard_normal(grid.n)
    u = solve_linear_neumann(dom, a, g, h)
    res = grid.laplacian(u) + a * u - g
    assert np.abs(res).max() <= 1e-9 * np.abs(g).max()


def test_detect_flips_once_through_lambda1():
    dom, h = Interval(1.0), 1 / 64
    lam1 = neumann_lambda1(dom, h)
    cs = np.linspace(0.5 * lam1, 1.5 * lam1, 201)
    cs = cs[np.abs(cs - lam1) > 1e-3]
    verdicts = [detect_nontrivial(dom, c, h).verdict for c in np.append(cs, lam1)]
    assert verdicts[-1] is Nontriviality.NONTRIVIAL
    assert all(v is not Nontriviality.NONTRIVIAL for v in verdicts[:-1])


def test_solve_refuses_singular():
    dom, h = Interval(1.0), 1 / 64
    with pytest.raises(NearSingular):
        solve_linear_neumann(dom, 0.0, np.ones(65), h)


def test_counterexample_negative_mean_and_vanishing():
    res = [mean_nonnegativity_counterexample(Rectangle(1.0, 1.0), n, 1 / 32) for n in (2, 4, 16)]
    assert all(r.integral < 0 for r in res)
    sups = [r.norms[math.inf] for r in res]
    assert sups[0] > sups[1] > sups[2]
    assert all(r.residual < 1e-10 for r in res)

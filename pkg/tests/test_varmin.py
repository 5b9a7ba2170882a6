import math

import numpy as np
import pytest

from lyapunov_bvp import constants as C
from lyapunov_bvp.grids import Disc, Interval, Rectangle
from lyapunov_bvp.pde import neumann_lambda1
from lyapunov_bvp.varmin import (beta1_vanishing_family, cot_sum_min, minimize_antiperiodic_quotient,
                                 minimize_neumann_constrained, mixed_quotient_min, scaling_law_check)


@pytest.mark.parametrize("p", [1.5, 2.0, 4.0, math.inf])
def test_antiperiodic_matches_closed_form(p):
    T = 1.7
    res = minimize_antiperiodic_quotient(p, T, mesh=256)
    assert res.value == pytest.approx(C.beta_antiperiodic(p, T), rel=1e-3)
    assert res.converged


def test_p_one_is_exact():
    assert minimize_antiperiodic_quotient(1.0, 2.0, mesh=128).value == pytest.approx(2.0, rel=1e-12)


def test_antiperiodic_minimiser_changes_sign_across_period():
    res = minimize_antiperiodic_quotient(3.0, 1.0, mesh=256)
    v = res.minimizer
    # v(T) = -v(0): the last node sits one element before the wrap
    assert abs(v[-1] + v[0]) < 0.05 * np.abs(v).max()
    assert res.euler_residual < 1e-6


def test_neumann_interval_equals_antiperiodic():
    for p in (2.0, 5.0):
        a = minimize_neumann_constrained(p, Interval(1.0), mesh=256)
        assert a.value == pytest.approx(C.mp_antiperiodic(1.0, p).value, rel=1e-3)
        assert a.constraint_residual <= 1e-10


def test_neumann_square_below_lambda1_and_increasing():
    dom, h = Rectangle(1.0, 1.0), 1 / 32
    b2 = minimize_neumann_constrained(2.0, dom, h=h)
    b4 = minimize_neumann_constrained(4.0, dom, h=h)
    lam = neumann_lambda1(dom, h)
    assert b2.value < b4.value < lam
    assert b2.constraint_residual <= 1e-10


def test_neumann_rejects_small_p():
    with pytest.raises(ValueError):
        minimize_neumann_constrained(1.0, Rectangle(1.0, 1.0), h=1 / 32)


def test_mixed_quotient():
    M, L = 1.0, 1.0
    assert mixed_quotient_min(M, 0.0, L) == pytest.approx(math.sqrt(M) / math.tan(math.sqrt(M) * L),
                                                          rel=1e-4)


def test_cot_sum():
    for r, S in ((2, 1.5), (3, 2.0)):
        res = cot_sum_min(r, S)
        assert res.value == pytest.approx(r / math.tan(S / r))
        assert res.brute_force_value >= res.value - 1e-12
        assert res.brute_force_value == pytest.approx(res.value, rel=5e-3)


def test_vanishing_family():
    fam = [beta1_vanishing_family(Disc(1.0), k) for k in (1, 2, 6)]
    assert [m.l1_positive for m in fam] == pytest.approx([m.l1_exact for m in fam], rel=1e-10)
    assert fam[0].l1_positive / fam[-1].l1_positive == pytest.approx(6.0, rel=1e-8)
    assert max(m.residual for m in fam) < 1e-6


def test_scaling_law_1d():
    rep = scaling_law_check(Interval(1.0), 3.0, 2.0, mesh=256)
    assert rep.passed
    assert rep.ratio == pytest.approx(2.0 ** (1 / 3 - 2), rel=2e-2)

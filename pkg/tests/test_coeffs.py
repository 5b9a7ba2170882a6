import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lyapunov_bvp.coeffs import (Constant, Fourier, MatrixCoefficient, PiecewiseConstant,
                                 PrecVerdict, SampledGrid, SpatialCoefficient2D, check_prec,
                                 lp_norm, lp_norm_on, mean, rescale_period)
from lyapunov_bvp.grids import Interval


def test_constant_norms():
    c = Constant(3.0, 2.0)
    assert lp_norm(c, 1) == pytest.approx(6.0)
    assert lp_norm(c, 2) == pytest.approx(3.0 * math.sqrt(2.0))
    assert lp_norm(c, math.inf) == 3.0
    assert lp_norm(Constant(-1.0, 2.0), 2) == 0.0
    assert lp_norm(Constant(-1.0, 2.0), 2, positive_part=False) == pytest.approx(math.sqrt(2))


def test_fourier_evaluation_and_norm():
    T = 2 * math.pi
    f = Fourier(1.0, ((0.5, 0.0),), T)
    assert f(0.0) == pytest.approx(1.5)
    assert f(math.pi) == pytest.approx(0.5)
    assert f.integral() == pytest.approx(T)
    # int (1 + 0.5 cos t)^2 = 2 pi (1 + 1/8)
    assert lp_norm(f, 2) == pytest.approx(math.sqrt(2 * math.pi * 1.125), rel=1e-10)
    lo, hi = f.extrema()
    assert lo == pytest.approx(0.5) and hi == pytest.approx(1.5)


def test_piecewise_positive_part_and_subinterval():
    a = PiecewiseConstant((0.0, 1.0, 3.0), (2.0, -1.0), 3.0)
    assert mean(a) == pytest.approx(0.0)
    assert lp_norm(a, 1) == pytest.approx(2.0)
    assert lp_norm(a, math.inf) == 2.0
    assert lp_norm_on(a, 1.0, 3.0) == 0.0
    assert a(1.0) == -1.0 and a(0.999) == 2.0


def test_sampled_grid_is_periodic_linear():
    s = SampledGrid((0.0, 2.0), 2.0)
    assert s(0.5) == pytest.approx(1.0)
    assert s(1.5) == pytest.approx(1.0)
    assert s(2.0) == pytest.approx(0.0)
    assert lp_norm(s, 1) == pytest.approx(2.0)


def test_check_prec_verdicts():
    T = 1.0
    assert check_prec(Fourier(2.0, ((1.0, 0.0),), T), 1.0) is PrecVerdict.HOLDS
    assert check_prec(Fourier(2.0, ((1.0, 0.0),), T), 1.5) is PrecVerdict.FAILS_SOMEWHERE
    assert check_prec(Constant(1.0, T), 1.0) is PrecVerdict.NOWHERE_STRICT


def test_rescale_period_scales_values():
    a = Fourier(1.0, ((0.3, 0.1),), 2 * math.pi)
    b = rescale_period(a, math.pi)
    assert b.T == pytest.approx(math.pi)
    assert b(0.4) == pytest.approx(4 * a(0.8))


def test_matrix_must_be_symmetric_and_share_period():
    T = 1.0
    with pytest.raises(ValueError):
        MatrixCoefficient(((Constant(1, T), Constant(2, T)), (Constant(3, T), Constant(1, T))))
    with pytest.raises(ValueError):
        MatrixCoefficient(((Constant(1, T), Constant(0, 2.0)), (Constant(0, 2.0), Constant(1, T))))
    m = MatrixCoefficient(((Constant(1, T), Constant(2, T)), (Constant(2, T), Constant(1, T))))
    assert m.n == 2


def test_spatial_coefficient_checks_node_count():
    with pytest.raises(ValueError):
        SpatialCoefficient2D(Interval(1.0), 1 / 64, np.zeros(10))
    c = SpatialCoefficient2D(Interval(1.0), 1 / 64, np.zeros(65))
    assert c.values.shape == (65,)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(-3.0, 3.0), st.floats(-2.0, 2.0),
       st.sampled_from([1.0, 1.5, 2.0, 4.0, math.inf]), st.floats(0.1, 10.0))
def test_norm_is_positively_homogeneous(T, a0, c1, p, scale):
    f = Fourier(a0, ((c1, 0.5),), T)
    g = Fourier(scale * a0, ((scale * c1, scale * 0.5),), T)
    assert lp_norm(g, p) == pytest.approx(scale * lp_norm(f, p), rel=1e-8, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=6), st.floats(0.5, 4.0))
def test_piecewise_integral_is_weighted_sum(values, T):
    m = len(values)
    breaks = tuple(np.linspace(0.0, T, m + 1))
    a = PiecewiseConstant(breaks, tuple(values), T)
    assert a.integral() == pytest.approx(sum(values) * T / m, abs=1e-10)
    assert lp_norm(a, 1, positive_part=False) == pytest.approx(
        sum(abs(v) for v in values) * T / m, abs=1e-10)

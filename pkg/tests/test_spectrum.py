import math

import numpy as np
import pytest

from lyapunov_bvp.coeffs import Constant, Fourier, MatrixCoefficient, PiecewiseConstant
from lyapunov_bvp.spectrum import (Boundary, discretized_scalar_eigenvalues, free_eigenvalue,
                                   krein_lambda1, scalar_eigenvalues, shifted_constant_spectrum,
                                   verify_interlacing, zero_structure)


@pytest.mark.parametrize("boundary", list(Boundary))
def test_free_spectrum(boundary):
    T = 1.7
    tab = scalar_eigenvalues(Constant(0.0, T), boundary, 6)
    exact = [free_eigenvalue(boundary, e.index, T) for e in tab.eigenvalues]
    assert np.allclose(tab.values, exact, rtol=1e-9, atol=1e-9)


def test_indexing_conventions():
    T = math.pi
    per = scalar_eigenvalues(Constant(0.0, T), Boundary.PERIODIC, 5)
    anti = scalar_eigenvalues(Constant(0.0, T), Boundary.ANTIPERIODIC, 4)
    assert per[0] == pytest.approx(0.0, abs=1e-9)
    assert per[1] == pytest.approx(4.0) and per[2] == pytest.approx(4.0)
    assert anti[1] == pytest.approx(1.0) and anti[2] == pytest.approx(1.0)


@pytest.mark.parametrize("boundary", list(Boundary))
def test_constant_shift(boundary):
    c = Constant(2.5, 2.0)
    tab = scalar_eigenvalues(c, boundary, 5)
    assert np.allclose(tab.values, shifted_constant_spectrum(c, boundary, 5), atol=1e-8)


def test_discretized_agrees_with_discriminant():
    a = Fourier(1.0, ((2.0, 0.5), (0.3, 0.0)), 2.0)
    for b in Boundary:
        ev = scalar_eigenvalues(a, b, 6).values
        fd = discretized_scalar_eigenvalues(a, b, 1024, 6).values
        assert np.allclose(ev, fd, rtol=1e-3, atol=1e-3)


def test_interlacing_piecewise():
    a = PiecewiseConstant((0.0, 0.5, 1.2, 2.0), (5.0, -2.0, 12.0), 2.0)
    rep = verify_interlacing(a, 3)
    assert rep.holds, rep.violation


def test_krein_lambda1_constant_identity():
    # P = I on period T: -u'' = lam u antiperiodic, lambda_1 = (pi/T)^2
    T = 2.0
    one, zero = Constant(1.0, T), Constant(0.0, T)
    lam = krein_lambda1(MatrixCoefficient(((one, zero), (zero, one))), 512)
    assert lam == pytest.approx((math.pi / T) ** 2, rel=1e-4)


def test_zero_structure_of_constant():
    # a = 4 on T = pi is the periodic eigenvalue lambda_1 = lambda_2 shifted to 0
    z = zero_structure(Constant(4.0, math.pi), Boundary.PERIODIC)
    assert z.m == 2
    assert z.interlaced

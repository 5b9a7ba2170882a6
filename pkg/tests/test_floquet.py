import math

import numpy as np
import pytest

from lyapunov_bvp.coeffs import Constant, Fourier, MatrixCoefficient, PiecewiseConstant
from lyapunov_bvp.floquet import (MathieuTemplate, StabilityClass, classify, measured_order,
                                  monodromy, scalar_discriminant, sweep)


def test_constant_coefficient_matches_closed_form(rng):
    T = 2.0
    for c in rng.uniform(-5, 50, size=100):
        v = classify(monodromy(Constant(float(c), T)))
        if c <= 0:
            expected = StabilityClass.UNSTABLE if c < 0 else StabilityClass.BOUNDARY
        else:
            d = abs(2 * math.cos(math.sqrt(c) * T))
            if abs(d - 2) < 1e-6:
                continue
            expected = StabilityClass.STABLE if d < 2 else StabilityClass.UNSTABLE
        assert v.cls is expected, c


def test_determinant_is_one():
    for a in (Fourier(1.0, ((0.5, 0.2),), 2 * math.pi),
              PiecewiseConstant((0.0, 0.3, 1.0), (12.0, -3.0), 1.0)):
        assert abs(monodromy(a).det - 1) < 1e-10
    P = MatrixCoefficient(((Fourier(1.0, ((0.3, 0.0),), 2.0), Constant(0.2, 2.0)),
                           (Constant(0.2, 2.0), Constant(2.0, 2.0))))
    assert abs(monodromy(P).det - 1) < 1e-10


def test_measured_order_is_four():
    order, errs = measured_order(Fourier(1.0, ((0.5, 0.2),), 2 * math.pi))
    assert 3.5 <= order <= 4.5
    assert all(e2 < e1 for e1, e2 in zip(errs, errs[1:]))


def test_piecewise_constant_is_exact_on_breakpoints():
    # two constant pieces: product of exact transfer matrices
    a = PiecewiseConstant((0.0, 0.4, 1.0), (9.0, 1.0), 1.0)

    def transfer(c, L):
        w = math.sqrt(c)
        return np.array([[math.cos(w * L), math.sin(w * L) / w],
                         [-w * math.sin(w * L), math.cos(w * L)]])

    exact = transfer(1.0, 0.6) @ transfer(9.0, 0.4)
    assert np.allclose(monodromy(a, steps=1024).matrix, exact, atol=1e-10)


def test_discriminant_of_constant():
    lams = np.linspace(0.1, 20, 7)
    delta = scalar_discriminant(Constant(1.0, 1.0), lams)[0]
    assert np.allclose(delta, 2 * np.cos(np.sqrt(lams + 1.0)), atol=1e-10)


def test_mathieu_first_tongue_is_unstable():
    T = 2 * math.pi
    tpl = MathieuTemplate(T)
    assert classify(monodromy(tpl(0.25, 0.2))).cls is StabilityClass.UNSTABLE
    assert classify(monodromy(tpl(0.5, 0.2))).cls is StabilityClass.STABLE


def test_sweep_is_independent_of_workers():
    tpl = MathieuTemplate(2 * math.pi)
    alphas, betas = np.linspace(0, 2, 6), np.linspace(0, 1, 5)
    a = sweep(tpl, alphas, betas, workers=1)
    b = sweep(tpl, alphas, betas, workers=3)
    assert np.array_equal(a.class_grid(), b.class_grid())
    assert list(a.rows()) == list(b.rows())
    assert a.class_grid().shape == (6, 5)

import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from lyapunov_bvp import constants as C
from lyapunov_bvp.coeffs import (Constant, Fourier, MatrixCoefficient, PiecewiseConstant,
                                 SpatialCoefficient2D)
from lyapunov_bvp.floquet import StabilityClass, classify, monodromy
from lyapunov_bvp.grids import Interval, Rectangle, build_grid


def test_closed_forms():
    assert C.gamma1n_periodic(math.pi, 1).value == pytest.approx(4 * math.pi + 16, abs=1e-12)
    assert C.gamma1n_antiperiodic(math.pi, 1).value == pytest.approx(
        math.pi + 6 * math.sqrt(3), abs=1e-12)
    assert C.gamma1n_periodic(2.0, 0).value == 8.0
    assert C.gamma1n_antiperiodic(2.0, 0).value == 2.0
    assert C.gamma_inf_periodic(math.pi, 1).value == pytest.approx(16.0)
    assert not C.gamma1n_periodic(1.0, 2).attained


def test_singular_integral_against_scipy():
    # I(p) = int_0^1 (1 - s^q)^(-1/2), q = 2p/(p-1); substitute s = 1 - w^2
    for p in (1.5, 2.0, 5.0):
        q = 2 * p / (p - 1)
        ref = quad(lambda w: 2 * w / math.sqrt(1 - (1 - w * w) ** q), 0, 1)[0]
        assert C.singular_integral(p) == pytest.approx(ref, rel=1e-9)
    # p = 2: int_0^1 (1 - s^4)^(-1/2) ds = Gamma(1/4)^2 / (4 sqrt(2 pi))
    ref = float(mpmath.gamma(0.25) ** 2 / (4 * mpmath.sqrt(2 * mpmath.pi)))
    assert C.singular_integral(2.0) == pytest.approx(ref, rel=1e-12)


def test_mp_limits():
    T = 1.3
    assert C.mp_antiperiodic(T, 1.0001).value == pytest.approx(4 / T, rel=2e-3)
    assert C.mp_antiperiodic(T, 1e6).value == pytest.approx(math.pi**2 / T**2, rel=1e-3)
    assert C.mp_antiperiodic(T, math.inf).value == pytest.approx(math.pi**2 / T**2)
    ps = [1.2, 1.5, 2, 4, 10, 100]
    vals = [C.mp_antiperiodic(1.0, p).value for p in ps]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_mp_scaling_in_T():
    p = 3.0
    assert C.mp_antiperiodic(2.0, p).value == pytest.approx(
        C.mp_antiperiodic(1.0, p).value * 2.0 ** (1 / p - 2), rel=1e-12)


def test_classical_check():
    T = 2.0
    rep = C.classical_lyapunov_check(Fourier(1.0, ((0.5, 0.0),), T))
    assert rep.certified and rep.oracle.confirms
    rep = C.classical_lyapunov_check(Constant(3.0, T))
    assert not rep.certified


def test_hill_constant_coefficients():
    rep = C.certify_hill_stability(Constant(5.0, math.pi))
    assert rep.certified and rep.oracle.confirms
    # any non-square constant on period pi is stable and certified
    rep = C.certify_hill_stability(Constant(20.0, math.pi))
    assert rep.certified
    assert classify(monodromy(Constant(20.0, math.pi))).cls is StabilityClass.STABLE


def test_hill_not_certified_example():
    a = PiecewiseConstant((0.0, math.pi / 2, math.pi), (16.5, 40.0), math.pi)
    rep = C.certify_hill_stability(a)
    assert not rep.certified
    assert rep.verdict.startswith("NotCertified")


def test_hill_rejects_other_periods():
    with pytest.raises(ValueError):
        C.certify_hill_stability(Constant(5.0, 2.0))


def test_zone_certificates_and_oracles():
    T = 1.0
    lam = (2 * math.pi / T) ** 2
    room = C.gamma1n_periodic(T, 1).value - lam * T
    a = Fourier(lam + 0.4 * room / T, ((0.3 * room / T, 0.0),), T)
    rep = C.certify_periodic_zone(a, 1)
    assert rep.certified and rep.oracle.confirms
    big = Fourier(lam + 1.1 * room / T, ((0.3 * room / T, 0.0),), T)
    assert not C.certify_periodic_zone(big, 1).certified


def test_zone_pair_implies_stability():
    T = 1.0
    lam_p = (2 * math.pi / T) ** 2
    a = Constant(lam_p + 2.0, T)
    assert C.certify_periodic_zone(a, 1).certified
    assert C.certify_antiperiodic_zone(a, 1).certified
    assert classify(monodromy(a)).cls is StabilityClass.STABLE


def test_krein_certificate():
    T = 2.0
    P = MatrixCoefficient(((Constant(0.5, T), Constant(0.1, T)), (Constant(0.1, T), Constant(0.6, T))))
    B = MatrixCoefficient(((Constant(0.7, T), Constant(0.0, T)), (Constant(0.0, T), Constant(0.8, T))))
    rep = C.certify_krein_system(P, B, [math.inf, 2.0])
    assert rep.certified and rep.oracle.confirms
    Bbig = MatrixCoefficient(((Constant(5.0, T), Constant(0.0, T)), (Constant(0.0, T), Constant(0.8, T))))
    assert not C.certify_krein_system(P, Bbig, [math.inf, 2.0]).certified


def test_2x2_coupling():
    T = 2.0
    P = MatrixCoefficient(((Constant(0.8, T), Constant(0.3, T)), (Constant(0.3, T), Constant(0.5, T))))
    rep = C.certify_2x2_coupling(P, math.inf, math.inf)
    assert rep.certified and rep.oracle.confirms


def test_elliptic_system_with_chosen_majorant():
    dom, h = Rectangle(1.0, 1.0), 1 / 32
    grid = build_grid(dom, h)
    vals = np.zeros((grid.n, 2, 2))
    vals[:, 0, 0] = 2.0 + np.cos(math.pi * grid.coords[:, 0])
    vals[:, 1, 1] = 1.5
    vals[:, 0, 1] = vals[:, 1, 0] = 0.5
    lam1 = C._beta_field(dom, h, math.inf)
    gamma = C.choose_coupling_gamma(grid, vals, math.inf, math.inf, lam1, lam1)
    assert gamma is not None
    B = C.coupling_bound_matrix(vals, gamma)
    rep = C.certify_elliptic_system(SpatialCoefficient2D(dom, h, vals), B, [math.inf, math.inf],
                                    betas=[lam1, lam1])
    assert rep.certified and rep.oracle.confirms


def test_disfocality_and_shooting_oracle():
    T = 2.0
    a = PiecewiseConstant((0.0, 1.0, 2.0), (1.5, 0.5), T)
    rep = C.two_step_disfocality(a, 1.0)
    assert rep.certified and rep.oracle.confirms
    # a resonant constant: cos(pi t / 2) is a Neumann solution
    res = C._shooting_neumann_oracle(Constant(math.pi**2 / 4, T), 1e-6, 100)
    assert res.agreement == "disagree"
    # negative mean fails the hypotheses
    assert not C.two_step_disfocality(PiecewiseConstant((0.0, 1.0, 2.0), (0.5, -1.0), T),
                                      1.0).certified


def test_hill_bound_monotone_in_k():
    p = 2
    ks = np.linspace(p * p + 0.01, (p + 1) ** 2 - 0.01, 20)
    vals = [C.hill_bound(k, p) for k in ks]
    assert all(b > a for a, b in zip(vals, vals[1:]))

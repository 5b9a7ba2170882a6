"""Closed-form Lyapunov constants and hypothesis-checking certificates.

Each ``certify_*`` function evaluates the hypotheses of a sufficient
condition one by one, records measured quantities against their bounds,
and (optionally) asks an independent numerical oracle whether the claimed
conclusion actually holds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from .coeffs import (
    MatrixCoefficient,
    PrecVerdict,
    ScalarCoefficient,
    SpatialCoefficient2D,
    check_prec,
    lp_norm,
    lp_norm_on,
    mean,
)
from .floquet import DEFAULT_STEPS, DEFAULT_TOL, StabilityClass, classify, monodromy
from .grids import Interval
from .report import CertificateReport, HypothesisCheck, OracleCheck

__all__ = [
    "LyapunovConstant",
    "gamma1n_periodic",
    "gamma1n_antiperiodic",
    "gamma_inf_periodic",
    "singular_integral",
    "mp_antiperiodic",
    "beta_antiperiodic",
    "hill_bound",
    "classical_lyapunov_check",
    "certify_periodic_zone",
    "certify_antiperiodic_zone",
    "certify_hill_stability",
    "certify_krein_system",
    "certify_2x2_coupling",
    "certify_elliptic_system",
    "coupling_bound_matrix",
    "choose_coupling_gamma",
    "two_step_disfocality",
]

PSD_FLOOR = 1e-10


@dataclass(frozen=True)
class LyapunovConstant:
    """A best Lyapunov constant for one problem family."""

    problem: str
    T: float
    value: float
    attained: bool
    params: dict = field(default_factory=dict)

    def to_dict(self):
        return {"problem": self.problem, "T": self.T, "value": self.value,
                "attained": self.attained, **self.params}


def _check_T(T):
    if not (np.isfinite(T) and T > 0):
        raise ValueError(f"T must be positive and finite, got {T!r}")


def _check_n(n):
    if int(n) != n or n < 0:
        raise ValueError(f"n must be a nonnegative integer, got {n!r}")
    return int(n)


def gamma1n_periodic(T, n):
    """Best ``L^1`` constant for the periodic problem above ``lambda_{2n-1}``.

    ``n = 0`` is the classical value ``16 / T``. For ``n >= 1``::

        T lambda_{2n-1} + (8 pi n (n + 1) / T) cot(n pi / (2 (n + 1)))

    with ``lambda_{2n-1} = (2 n pi / T)^2``.
    """
    _check_T(T)
    n = _check_n(n)
    if n == 0:
        value = 16.0 / T
    else:
        lam = (2 * n * math.pi / T) ** 2
        value = T * lam + (8 * math.pi * n * (n + 1) / T) / math.tan(n * math.pi / (2 * (n + 1)))
    return LyapunovConstant("periodic-l1", float(T), value, False, {"n": n})


def gamma1n_antiperiodic(T, n):
    """Best ``L^1`` constant for the antiperiodic problem above ``lambda~_{2n-1}``.

    ``n = 0`` gives ``4 / T``. For ``n >= 1``::

        T lambda~_{2n-1} + (2 pi (2n - 1)(2n + 1) / T) cot((2n - 1) pi / (2 (2n + 1)))

    with ``lambda~_{2n-1} = ((2n - 1) pi / T)^2``.
    """
    _check_T(T)
    n = _check_n(n)
    if n == 0:
        value = 4.0 / T
    else:
        lam = ((2 * n - 1) * math.pi / T) ** 2
        value = T * lam + (2 * math.pi * (2 * n - 1) * (2 * n + 1) / T) / math.tan(
            (2 * n - 1) * math.pi / (2 * (2 * n + 1)))
    return LyapunovConstant("antiperiodic-l1", float(T), value, False, {"n": n})


def gamma_inf_periodic(T, n):
    """Best ``L^inf`` constant for the periodic problem: ``4 (n + 1)^2 pi^2 / T^2``."""
    _check_T(T)
    n = _check_n(n)
    return LyapunovConstant("periodic-linf", float(T), 4 * (n + 1) ** 2 * math.pi**2 / T**2,
                            True, {"n": n})


@lru_cache(maxsize=128)
def singular_integral(p):
    """``I(p) = int_0^1 (1 - s^(2p/(p-1)))^(-1/2) ds`` by tanh-sinh quadrature.

    The integrand has an inverse square-root singularity at ``s = 1``; the
    double-exponential transform integrates it to full working precision.
    """
    p = float(p)
    if not p > 1:
        raise ValueError("p must be > 1")
    if math.isinf(p):
        return math.pi / 2
    q = mpmath.mpf(2) * p / (p - 1)
    with mpmath.workdps(30):
        val = mpmath.quad(lambda s: (1 - s**q) ** mpmath.mpf(-0.5), [0, 1], method="tanh-sinh")
    return float(val)


def mp_antiperiodic(T, p):
    """Best ``L^p`` antiperiodic (and Neumann) constant for ``1 < p < inf``::

        M_p = 4 I^2 p / (T^(2 - 1/p) (p - 1)^(1 - 1/p) (2p - 1)^(1/p))
    """
    _check_T(T)
    p = float(p)
    if not p > 1:
        raise ValueError("p must be > 1 (the p = 1 limit is gamma1n_antiperiodic(T, 0))")
    if math.isinf(p):
        return LyapunovConstant("antiperiodic-lp", float(T), math.pi**2 / T**2, True, {"p": "inf"})
    I = singular_integral(p)
    value = 4 * I**2 * p / (T ** (2 - 1 / p) * (p - 1) ** (1 - 1 / p) * (2 * p - 1) ** (1 / p))
    return LyapunovConstant("antiperiodic-lp", float(T), value, True, {"p": p, "I": I})


def beta_antiperiodic(p, T):
    """``beta_p^ant``: ``4/T`` at ``p = 1``, ``M_p`` for ``1 < p < inf``, ``pi^2/T^2`` at ``inf``."""
    p = float(p)
    if p == 1:
        return 4.0 / T
    if math.isinf(p):
        return math.pi**2 / T**2
    return mp_antiperiodic(T, p).value


def hill_bound(k, p):
    """Admissible ``L^1(0, pi)`` norm for ``k <= a``: ``k pi + 2 sqrt(k)(p+1) cot(sqrt(k) pi / (2(p+1)))``."""
    r = math.sqrt(k)
    ang = r * math.pi / (2 * (p + 1))
    cot = math.cos(ang) / math.sin(ang)
    return k * math.pi + 2 * r * (p + 1) * cot


# -- oracle helpers -----------------------------------------------------------


def _stability_oracle(coef, steps, tol=DEFAULT_TOL):
    try:
        m = monodromy(coef, steps)
    except Exception as exc:  # pragma: no cover - reported, not raised
        return OracleCheck("floquet", "inconclusive", {"error": str(exc)})
    v = classify(m, tol)
    if v.cls is StabilityClass.STABLE:
        agreement = "agree"
    elif v.coexistence:
        agreement = "consistent"
    else:
        agreement = "disagree"
    return OracleCheck("floquet", agreement, {"verdict": v.to_dict(), "steps": steps,
                                               "estimated_error": m.estimated_error})


def _sign_oracle(a, boundary, neg_index, steps):
    from .spectrum import scalar_eigenvalues

    first = 0 if boundary == "periodic" else 1
    count = neg_index + 2 - first
    try:
        tab = scalar_eigenvalues(a, boundary, count, steps)
    except Exception as exc:  # pragma: no cover
        return OracleCheck("spectrum", "inconclusive", {"error": str(exc)})
    lo, hi = tab[neg_index], tab[neg_index + 1]
    tol = 1e-7 * max(1.0, (math.pi / a.T) ** 2)
    if lo < -tol and hi > tol:
        agreement = "agree"
    elif lo < tol and hi > -tol:
        agreement = "inconclusive"
    else:
        agreement = "disagree"
    return OracleCheck("spectrum", agreement, {
        "boundary": boundary, f"index_{neg_index}": lo, f"index_{neg_index + 1}": hi,
        "steps": steps})


def _prec_check(a, lam, sample_count, label):
    verdict = check_prec(a, lam, sample_count)
    return HypothesisCheck(label, verdict is PrecVerdict.HOLDS, verdict.value, lam,
                           f"sampled at {sample_count} points")


# -- scalar certificates ------------------------------------------------------


def classical_lyapunov_check(a: ScalarCoefficient, sample_count=1024, oracle=True,
                             steps=DEFAULT_STEPS):
    """``0 < a`` (in the sense of the order relation) and ``int a <= 4 / T`` imply stability."""
    T = a.T
    checks = [
        _prec_check(a, 0.0, sample_count, "0 prec a"),
        HypothesisCheck("integral bound", mean(a) <= 4.0 / T, mean(a), 4.0 / T),
    ]
    orc = _stability_oracle(a, steps) if oracle else None
    return CertificateReport.from_checks(
        "classical-lyapunov", checks, {"claim": "stable"}, orc,
        {"sample_count": sample_count, "steps": steps})


def _zone_certificate(a, n, boundary, sample_count, oracle, steps):
    if n < 1:
        raise ValueError("n must be >= 1")
    T = a.T
    if boundary == "periodic":
        lam = (2 * n * math.pi / T) ** 2
        gamma = gamma1n_periodic(T, n).value
        lab = "lambda"
    else:
        lam = ((2 * n - 1) * math.pi / T) ** 2
        gamma = gamma1n_antiperiodic(T, n).value
        lab = "anti"
    norm = lp_norm(a, 1, positive_part=False)
    checks = [
        _prec_check(a, lam, sample_count, f"{lab}_{2 * n - 1} prec a"),
        HypothesisCheck("L1 norm bound", norm <= gamma, norm, gamma),
    ]
    conclusion = {"claim": "eigenvalue_signs", "boundary": boundary,
                  "negative": f"{lab}_{2 * n}", "positive": f"{lab}_{2 * n + 1}"}
    rep = CertificateReport.from_checks(f"{boundary}-zone", checks, conclusion, None,
                                        {"n": n, "sample_count": sample_count, "steps": steps})
    if oracle:
        orc = _sign_oracle(a, boundary, 2 * n, steps)
        rep = CertificateReport(rep.theorem, rep.hypotheses, rep.certified, rep.reason,
                                rep.conclusion, orc, rep.metadata)
    return rep


def certify_periodic_zone(a: ScalarCoefficient, n, sample_count=1024, oracle=True,
                          steps=DEFAULT_STEPS):
    """``lambda_{2n-1} < a`` and ``|a|_1 <= gamma_{1,n}`` imply ``lambda_{2n}(a) < 0 < lambda_{2n+1}(a)``."""
    return _zone_certificate(a, n, "periodic", sample_count, oracle, steps)


def certify_antiperiodic_zone(a: ScalarCoefficient, n, sample_count=1024, oracle=True,
                              steps=DEFAULT_STEPS):
    """Antiperiodic analogue with ``lambda~_{2n-1}`` and ``gamma~_{1,n}``."""
    return _zone_certificate(a, n, "antiperiodic", sample_count, oracle, steps)


def certify_hill_stability(a: ScalarCoefficient, p_max=None, oracle=True, steps=DEFAULT_STEPS):
    """Stability-zone certificate for coefficients of period ``pi``.

    Searches ``p = 1, 2, ...`` and takes ``k`` as large as admissible,
    ``k = min(inf a, (p+1)^2)`` clamped to ``[p^2, (p+1)^2]``, since the
    bound grows with ``k``. For even ``p = 2n`` the zone is
    ``(lambda_{2n}, lambda~_{2n+1})``; for odd ``p = 2n+1`` it is
    ``(lambda~_{2n+2}, lambda_{2n+1})``.

    Raises
    ------
    ValueError
        If the period is not ``pi``. A coefficient of period ``T`` can be
        brought to period ``pi`` by ``b(s) = (T/pi)^2 a(T s / pi)`` (see
        :func:`coeffs.rescale_period`) without changing stability.
    """
    if not math.isclose(a.T, math.pi, rel_tol=1e-12):
        raise ValueError(
            f"period must be pi (got {a.T}); rescale with b(s) = (T/pi)^2 a(T s/pi)")
    inf_a, sup_a = a.extrema()
    norm = lp_norm(a, 1, positive_part=False)
    if p_max is None:
        p_max = max(1, int(math.floor(math.sqrt(max(sup_a, 1.0)))) + 1)
    tried = []
    chosen = None
    for p in range(1, p_max + 1):
        k = min(max(inf_a, p * p), (p + 1) ** 2)
        bound = hill_bound(k, p)
        ok_k = inf_a >= k - 1e-12 * max(1.0, k)
        ok_n = norm <= bound
        tried.append({"p": p, "k": k, "bound": bound, "k_le_a": ok_k, "norm_ok": ok_n})
        if ok_k and ok_n:
            chosen = tried[-1]
            break
    if chosen is None:
        feasible = [t for t in tried if t["k_le_a"]]
        chosen = feasible[-1] if feasible else tried[0]
    p, k = chosen["p"], chosen["k"]
    checks = [
        HypothesisCheck("p in N", True, p, None),
        HypothesisCheck("k in [p^2, (p+1)^2]", p * p <= k <= (p + 1) ** 2, k, [p * p, (p + 1) ** 2]),
        HypothesisCheck("k <= a", chosen["k_le_a"], inf_a, k),
        HypothesisCheck("L1 norm bound", chosen["norm_ok"], norm, chosen["bound"]),
    ]
    if p % 2 == 0:
        zone = (f"lambda_{p}", f"anti_{p + 1}")
    else:
        zone = (f"anti_{p + 1}", f"lambda_{p}")
    conclusion = {"claim": "stability_zone", "zone": list(zone), "p": p, "k": k}
    orc = _stability_oracle(a, steps) if oracle else None
    return CertificateReport.from_checks("hill-stability", checks, conclusion, orc,
                                         {"search": tried, "steps": steps})


# -- systems ------------------------------------------------------------------


def _psd(M, floor=PSD_FLOOR):
    """Smallest eigenvalue of symmetric ``M`` and whether it clears the PSD floor."""
    M = np.asarray(M, dtype=float)
    ev = np.linalg.eigvalsh(0.5 * (M + np.swapaxes(M, -1, -2)))
    scale = max(1.0, float(np.abs(M).max()))
    lo = float(ev.min())
    return lo, lo >= -floor * scale


def _krein_class_checks(P: MatrixCoefficient, sample_count):
    T = P.T
    t = np.arange(sample_count) * (T / sample_count)
    vals = P(t)
    sym = True  # enforced by MatrixCoefficient
    stacked = vals.reshape(-1, P.n)
    smin = float(np.linalg.svd(stacked, compute_uv=False).min()) / math.sqrt(sample_count)
    scale = max(1e-300, float(np.abs(vals).max()))
    integral = P.integral()
    lo, ok = _psd(integral)
    return vals, [
        HypothesisCheck("P symmetric", sym, True, None),
        HypothesisCheck("no constant solutions", smin > 1e-8 * scale, smin, 1e-8 * scale,
                        "smallest singular value of stacked samples (RMS-normalised)"),
        HypothesisCheck("int P positive semidefinite", ok, lo, 0.0),
    ]


def _krein_oracle(P, steps, mesh):
    from .errors import NoPositiveEigenvalue
    from .spectrum import krein_lambda1

    flo = _stability_oracle(P, steps)
    try:
        lam1 = krein_lambda1(P, mesh)
    except NoPositiveEigenvalue:
        lam1 = math.inf
    detail = dict(flo.detail, krein_lambda1=lam1, mesh=mesh)
    if flo.agreement == "agree" and lam1 > 1:
        agreement = "agree"
    elif flo.agreement == "disagree" or lam1 < 1 - 1e-3:
        agreement = "disagree"
    else:
        agreement = "inconclusive"
    return OracleCheck("floquet+krein_lambda1", agreement, detail)


def certify_krein_system(P: MatrixCoefficient, B: MatrixCoefficient, p_list, sample_count=1024,
                         oracle=True, steps=DEFAULT_STEPS, mesh=256):
    """Stable boundedness of ``u'' + P(t) u = 0`` from a diagonal majorant ``B``.

    Checks the Krein class conditions, ``P <= B`` at the samples and
    ``|b_ii^+|_{p_i} < beta^ant_{p_i}`` (``<=`` when ``p_i = 1``).
    """
    p_list = [float(p) for p in p_list]
    if not (P.n == B.n == len(p_list)):
        raise ValueError("dimension mismatch between P, B and p_list")
    T = P.T
    vals, checks = _krein_class_checks(P, sample_count)
    t = np.arange(sample_count) * (T / sample_count)
    Bv = B(t)
    off = Bv - np.einsum("kii->ki", Bv)[..., None] * np.eye(B.n)
    checks.append(HypothesisCheck("B diagonal", float(np.abs(off).max()) == 0.0,
                                  float(np.abs(off).max()), 0.0))
    lo, ok = _psd(Bv - vals)
    checks.append(HypothesisCheck("P <= B", ok, lo, 0.0, f"min eigenvalue of B - P over {sample_count} samples"))
    for i, p in enumerate(p_list):
        norm = lp_norm(B.entries[i][i], p, positive_part=True)
        beta = beta_antiperiodic(p, T)
        passed = norm <= beta if p == 1 else norm < beta
        checks.append(HypothesisCheck(f"|b_{i + 1}{i + 1}+|_p < beta_ant", passed, norm, beta,
                                      f"p = {p}"))
    orc = _krein_oracle(P, steps, mesh) if oracle else None
    return CertificateReport.from_checks("krein-system", checks, {"claim": "stably_bounded"}, orc,
                                         {"p_list": p_list, "sample_count": sample_count,
                                          "steps": steps})


def certify_2x2_coupling(P: MatrixCoefficient, p1, p2, sample_count=1024, oracle=True,
                         steps=DEFAULT_STEPS, mesh=256):
    """Stable boundedness for a 2x2 coefficient from the coupled norm condition.

    ``p_11, p_22 >= 0``, ``det P >= 0`` (nonzero somewhere) and::

        |p_11|_{p1} < beta_{p1},   |p_22 + p_12^2 / (beta_{p1} - |p_11|_{p1})|_{p2} < beta_{p2}
    """
    if P.n != 2:
        raise ValueError("P must be 2x2")
    T = P.T
    p1, p2 = float(p1), float(p2)
    t = np.arange(sample_count) * (T / sample_count)
    v = P(t)
    p11, p22, p12 = v[:, 0, 0], v[:, 1, 1], v[:, 0, 1]
    det = p11 * p22 - p12**2
    scale = max(1.0, float(np.abs(v).max())) ** 2
    checks = [
        HypothesisCheck("p11 >= 0", p11.min() >= 0, float(p11.min()), 0.0),
        HypothesisCheck("p22 >= 0", p22.min() >= 0, float(p22.min()), 0.0),
        HypothesisCheck("det P >= 0", det.min() >= -1e-14 * scale, float(det.min()), 0.0),
        HypothesisCheck("det P != 0 somewhere", np.abs(det).max() > 1e-12 * scale,
                        float(np.abs(det).max()), 0.0),
    ]
    n11 = lp_norm(P.entries[0][0], p1, positive_part=False)
    b1 = beta_antiperiodic(p1, T)
    b2 = beta_antiperiodic(p2, T)
    checks.append(HypothesisCheck("|p11|_p1 < beta_p1", n11 < b1, n11, b1))
    if n11 < b1:
        combo = _combined_coefficient(P.entries[0][1], P.entries[1][1], 1.0 / (b1 - n11))
        n2 = lp_norm(combo, p2, positive_part=False)
    else:
        n2 = math.inf
    checks.append(HypothesisCheck("|p22 + p12^2/(beta_p1 - |p11|)|_p2 < beta_p2", n2 < b2, n2, b2))
    orc = _stability_oracle(P, steps) if oracle else None
    return CertificateReport.from_checks("2x2-coupling", checks, {"claim": "stably_bounded"}, orc,
                                         {"p1": p1, "p2": p2, "sample_count": sample_count,
                                          "steps": steps})


@dataclass(frozen=True)
class _Combined(ScalarCoefficient):
    """``p22(t) + c p12(t)^2`` as a scalar coefficient (for norms)."""

    p12: ScalarCoefficient
    p22: ScalarCoefficient
    c: float

    @property
    def T(self):
        return self.p22.T

    def _eval(self, t):
        return self.p22(t) + self.c * self.p12(t) ** 2

    @property
    def breakpoints(self):
        return tuple(sorted(set(self.p12.breakpoints) | set(self.p22.breakpoints)))

    @property
    def is_exact_extremal(self):
        return False

    def extrema(self, lo=0.0, hi=None):
        from .coeffs import _refined_extrema

        hi = self.T if hi is None else hi
        return _refined_extrema(self, lo, hi, 4096)

    def abs_pow_integral(self, p, positive_part):
        from .coeffs import _gl_abs_pow

        bp = np.asarray(self.breakpoints)
        return _gl_abs_pow(self, p, positive_part, max(256, 4 * bp.size))


def _combined_coefficient(p12, p22, c):
    return _Combined(p12, p22, float(c))


# -- elliptic systems -----------------------------------------------------------


def _beta_field(domain, h, p):
    from .pde import neumann_lambda1

    if math.isinf(p):
        return neumann_lambda1(domain, h)
    if isinstance(domain, Interval):
        return mp_antiperiodic(domain.length, p).value
    from .varmin import neumann_beta

    return neumann_beta(domain, h, p)


def _diag_values(B, n):
    vals = np.asarray(B.values if isinstance(B, SpatialCoefficient2D) else B, dtype=float)
    if vals.ndim == 3:
        off = vals - np.einsum("kii->ki", vals)[..., None] * np.eye(n)
        return np.einsum("kii->ki", vals), float(np.abs(off).max())
    return vals.reshape(vals.shape[0], n), 0.0


def certify_elliptic_system(A: SpatialCoefficient2D, B, p_list, betas=None, oracle=True,
                            tol=1e-6):
    """Only-trivial-solution certificate for ``Delta u + A(x) u = 0`` (Neumann).

    Parameters
    ----------
    A : SpatialCoefficient2D
        Symmetric matrix field with values of shape ``(nodes, n, n)``.
    B : SpatialCoefficient2D or array
        Diagonal majorant, either ``(nodes, n)`` diagonal entries or a full
        ``(nodes, n, n)`` diagonal field.
    p_list : sequence of float
        Exponents ``p_i`` in ``(N/2, inf]``.
    betas : sequence of float, optional
        Precomputed ``beta_{p_i}(Omega)`` on the same grid; computed from the
        discrete Neumann eigenvalue (``p = inf``) or the constrained
        minimisation otherwise.
    """
    from .grids import build_grid
    from .pde import detect_nontrivial, lp_norm_field

    vals = np.asarray(A.values, dtype=float)
    if vals.ndim != 3:
        raise ValueError("A must be a matrix field with values of shape (nodes, n, n)")
    n = vals.shape[1]
    if len(p_list) != n:
        raise ValueError("p_list length must equal the system dimension")
    if isinstance(B, SpatialCoefficient2D) and (B.domain != A.domain or not math.isclose(B.h, A.h)):
        raise ValueError("A and B live on different grids")
    domain, h = A.domain, A.h
    grid = build_grid(domain, h)
    N = domain.dim
    p_list = [float(p) for p in p_list]
    for p in p_list:
        if not p > N / 2:
            raise ValueError(f"p must exceed N/2 = {N / 2}")
    diag, offmax = _diag_values(B, n)
    if diag.shape[0] != grid.n:
        raise ValueError("B does not match the grid of A")

    asym = float(np.abs(vals - np.swapaxes(vals, 1, 2)).max())
    integral = np.einsum("k,kij->ij", grid.weights, vals)
    lo_int, ok_int = _psd(integral)
    smin = float(np.linalg.svd((np.sqrt(grid.weights)[:, None, None] * vals).reshape(-1, n),
                               compute_uv=False).min())
    scale = max(1e-300, float(np.abs(vals).max())) * math.sqrt(grid.weights.sum())
    lo_ab, ok_ab = _psd(diag[:, :, None] * np.eye(n) - vals)
    checks = [
        HypothesisCheck("A symmetric", asym <= 1e-12 * max(1.0, np.abs(vals).max()), asym, 0.0),
        HypothesisCheck("int A positive semidefinite", ok_int, lo_int, 0.0),
        HypothesisCheck("no constant solutions", smin > 1e-8 * scale, smin, 1e-8 * scale),
        HypothesisCheck("B diagonal", offmax == 0.0, offmax, 0.0),
        HypothesisCheck("A <= B", ok_ab, lo_ab, 0.0, "min eigenvalue of B - A over grid nodes"),
    ]
    if betas is None:
        betas = [_beta_field(domain, h, p) for p in p_list]
    for i, (p, beta) in enumerate(zip(p_list, betas)):
        norm = lp_norm_field(grid, diag[:, i], p, positive_part=True)
        checks.append(HypothesisCheck(f"|b_{i + 1}{i + 1}+|_p < beta_p", norm < beta, norm, beta,
                                      f"p = {p}"))
    orc = None
    if oracle:
        res = detect_nontrivial(domain, vals, h, tol)
        decoupled = [detect_nontrivial(domain, diag[:, i], h, tol).verdict.value for i in range(n)]
        agreement = {"only_trivial": "agree", "nontrivial": "disagree",
                     "inconclusive": "inconclusive"}[res.verdict.value]
        orc = OracleCheck("pde.detect_nontrivial", agreement,
                          dict(res.to_dict(), decoupled_bounds=decoupled))
    return CertificateReport.from_checks(
        "elliptic-system", checks, {"claim": "only_trivial_solution"}, orc,
        {"p_list": p_list, "betas": list(map(float, betas)), "grid": grid.metadata,
         "h": h, "domain": domain.to_dict()})


def coupling_bound_matrix(A_vals, gamma):
    """Diagonal majorant ``diag(a11 + gamma, a22 + a12^2 / gamma)`` of a 2x2 field."""
    A_vals = np.asarray(A_vals, dtype=float)
    return np.column_stack([A_vals[:, 0, 0] + gamma, A_vals[:, 1, 1] + A_vals[:, 0, 1] ** 2 / gamma])


def choose_coupling_gamma(grid, A_vals, p1, p2, beta1, beta2, iters=200):
    """Pick ``gamma`` making the 2x2 diagonal majorant admissible, or ``None``.

    ``|(a11 + gamma)^+|_{p1}`` increases and ``|(a22 + a12^2/gamma)^+|_{p2}``
    decreases in ``gamma``; both feasibility limits are found by bisection
    and the midpoint of the feasible interval is returned.
    """
    from .pde import lp_norm_field

    A_vals = np.asarray(A_vals, dtype=float)
    f1 = lambda g: lp_norm_field(grid, A_vals[:, 0, 0] + g, p1) - beta1  # noqa: E731
    f2 = lambda g: lp_norm_field(grid, A_vals[:, 1, 1] + A_vals[:, 0, 1] ** 2 / g, p2) - beta2  # noqa: E731
    if f1(0.0) >= 0:
        return None
    hi = 1.0
    while f1(hi) < 0:
        hi *= 2
        if hi > 1e12:
            break
    lo = 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if f1(mid) < 0 else (lo, mid)
    g_max = lo
    if g_max <= 0 or f2(g_max) >= 0:
        return None
    lo, hi = 0.0, g_max
    if np.abs(A_vals[:, 0, 1]).max() == 0:
        return 0.5 * g_max
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid == 0:
            break
        lo, hi = (lo, mid) if f2(mid) < 0 else (mid, hi)
    return 0.5 * (hi + g_max)


# -- disfocality --------------------------------------------------------------------


def _shooting_neumann_oracle(a, tol, cells, steps=4096):
    """Nontrivial Neumann solutions on ``[0, T]`` exist iff ``y'(T) = 0`` for the
    solution with ``y(0) = 1, y'(0) = 0``; that derivative is read off the
    fundamental matrix. A finite-volume eigenvalue test is recorded alongside.
    """
    from .floquet import monodromy
    from .pde import detect_nontrivial

    T = a.T
    try:
        mono = monodromy(a, steps=steps)
    except Exception as exc:  # noqa: BLE001 - reported as an inconclusive oracle
        return OracleCheck("shooting", "inconclusive", {"error": str(exc)})
    M = mono.matrix
    amax = max(abs(v) for v in a.extrema())
    scale = math.sqrt(amax + (math.pi / T) ** 2) * max(1.0, abs(M[0, 0]))
    slope = abs(float(M[1, 0]))
    floor = max(tol * scale, 10 * mono.estimated_error)
    if slope > 10 * floor:
        agreement = "agree"
    elif slope < tol * scale:
        agreement = "disagree"
    else:
        agreement = "inconclusive"
    h = T / cells
    fv = detect_nontrivial(Interval(T), np.asarray(a(np.arange(cells + 1) * h), dtype=float), h,
                           tol)
    return OracleCheck("shooting", agreement, {
        "end_slope": slope, "scale": scale, "estimated_error": mono.estimated_error,
        "steps": steps, "finite_volume": dict(fv.to_dict(), cells=cells)})


def two_step_disfocality(a: ScalarCoefficient, t0, oracle=True, oracle_cells=100, tol=1e-6):
    """Neumann uniqueness on ``[0, T]`` from a two-step ``L^inf`` bound.

    Hypotheses: ``a`` not identically zero, ``int a >= 0``,
    ``max(t0^2 sup_(0,t0) a^+, (T-t0)^2 sup_(t0,T) a^+) <= pi^2/4``, and the
    two pieces are not both equal to their critical constants.
    """
    T = a.T
    if not 0 < t0 < T:
        raise ValueError("t0 must lie in (0, T)")
    crit = math.pi**2 / 4
    s1 = lp_norm_on(a, 0.0, t0)
    s2 = lp_norm_on(a, t0, T)
    c1, c2 = t0**2 * s1, (T - t0) ** 2 * s2
    inf1 = a.extrema(0.0, t0)[0]
    inf2 = a.extrema(t0, T)[0]
    rt = 1e-12
    both_critical = (inf1 * t0**2 >= crit * (1 - rt) and c1 <= crit * (1 + rt)
                     and inf2 * (T - t0) ** 2 >= crit * (1 - rt) and c2 <= crit * (1 + rt))
    samples = a(np.arange(1024) * (T / 1024))
    amax = max(float(np.abs(samples).max()), abs(a.extrema()[0]), abs(a.extrema()[1]))
    integral = mean(a)
    checks = [
        HypothesisCheck("a not identically zero", amax > 0, amax, 0.0),
        HypothesisCheck("int a >= 0", integral >= 0, integral, 0.0),
        HypothesisCheck("two-step sup bound", max(c1, c2) <= crit, [c1, c2], crit),
        HypothesisCheck("not both pieces critical", not both_critical, both_critical, False),
    ]
    orc = _shooting_neumann_oracle(a, tol, oracle_cells) if oracle else None
    return CertificateReport.from_checks("two-step-disfocality", checks,
                                         {"claim": "only_trivial_solution", "t0": t0}, orc,
                                         {"t0": t0})

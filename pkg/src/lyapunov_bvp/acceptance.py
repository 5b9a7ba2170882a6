"""Acceptance criteria as runnable checks.

Each ``criterion_k`` returns a :class:`CriterionResult` with a pass flag,
the wall time and the measured quantities. ``run_all`` executes them in
order (criterion 10 also receives the time spent on 1-9) and is what the
``selftest`` subcommand and ``tests/test_acceptance.py`` call.

The randomised corpora are generated from fixed seeds, so every run sees
the same instances.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import jnp_zeros

from . import constants as C
from .coeffs import (Constant, Fourier, MatrixCoefficient, PiecewiseConstant, SampledGrid,
                     SpatialCoefficient2D, lp_norm, rescale_period)
from .floquet import MathieuTemplate, StabilityClass, classify, measured_order, monodromy, sweep
from .grids import Disc, Interval, Rectangle, build_grid
from .pde import mean_nonnegativity_counterexample, neumann_lambda1
from .spectrum import (Boundary, discretized_scalar_eigenvalues, free_eigenvalue,
                       scalar_eigenvalues, verify_interlacing)

__all__ = ["CriterionResult", "CRITERIA", "run_all", "random_coefficient"]

SELFTEST_BUDGET = 20 * 60.0


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float = 0.0
    summary: str = ""
    detail: dict = field(default_factory=dict)

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  C{self.number:<2d} {self.title:<38s} {self.seconds:8.2f} s  {self.summary}"

    def to_dict(self):
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "seconds": self.seconds, "summary": self.summary, "detail": self.detail}


def _timed(number, title):
    def wrap(fn):
        def run(*args, **kwargs):
            t0 = time.perf_counter()
            passed, summary, detail = fn(*args, **kwargs)
            return CriterionResult(number, title, bool(passed), time.perf_counter() - t0, summary,
                                   detail)

        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        run.number = number
        run.title = title
        return run

    return wrap


# -- seeded corpora ---------------------------------------------------------------


def _fourier_shape(rng, T, terms=3):
    """Random trigonometric polynomial ``g >= 0`` with ``min g = 0`` (approximately)."""
    amps = rng.normal(size=(terms, 2)) / (1.0 + np.arange(terms))[:, None]
    f = Fourier(0.0, tuple(map(tuple, amps)), T)
    lo, _ = f.extrema()
    return Fourier(-lo, f.terms, T)


def random_coefficient(rng, T=None, kind=None):
    """Seeded random periodic coefficient (Fourier, samples or piecewise)."""
    T = float(rng.uniform(0.8, 2 * math.pi)) if T is None else T
    kind = kind or rng.choice(["fourier", "samples", "piecewise"])
    scale = (math.pi / T) ** 2
    if kind == "fourier":
        k = int(rng.integers(1, 4))
        terms = tuple((float(a), float(b)) for a, b in rng.normal(scale=1.5 * scale, size=(k, 2)))
        return Fourier(float(rng.uniform(-2, 6) * scale), terms, T)
    if kind == "samples":
        m = int(rng.integers(8, 24))
        x = np.cumsum(rng.normal(scale=scale, size=m))
        x -= x.mean() - rng.uniform(-2, 6) * scale
        return SampledGrid(tuple(map(float, x)), T)
    m = int(rng.integers(2, 6))
    cuts = np.sort(rng.uniform(0.05, 0.95, size=m - 1)) * T
    vals = rng.uniform(-3, 8, size=m) * scale
    return PiecewiseConstant((0.0,) + tuple(map(float, cuts)) + (T,), tuple(map(float, vals)), T)


def _lift(shape, level, scale):
    """``level + scale * shape`` as a Fourier coefficient."""
    return Fourier(level + scale * shape.a0, tuple((scale * a, scale * b) for a, b in shape.terms),
                   shape.T)


def _zone_instance(rng, boundary):
    T = float(rng.uniform(0.7, 2 * math.pi))
    n = int(rng.integers(1, 3))
    if boundary == "periodic":
        lam, gam = (2 * n * math.pi / T) ** 2, C.gamma1n_periodic(T, n).value
    else:
        lam, gam = ((2 * n - 1) * math.pi / T) ** 2, C.gamma1n_antiperiodic(T, n).value
    room = gam - lam * T
    frac = float(rng.uniform(0.15, 0.9))
    if rng.random() < 0.7:
        g = _fourier_shape(rng, T)
        c = frac * room / (g.integral() + 1e-6 * T)
        a = _lift(g, lam + 1e-6 * c, c)
    else:
        m = int(rng.integers(2, 5))
        cuts = np.sort(rng.uniform(0.05, 0.95, size=m - 1)) * T
        w = rng.uniform(0, 1, size=m)
        widths = np.diff(np.concatenate([[0.0], cuts, [T]]))
        w *= frac * room / float(np.dot(w, widths))
        a = PiecewiseConstant((0.0,) + tuple(map(float, cuts)) + (T,), tuple(lam + w), T)
    fn = C.certify_periodic_zone if boundary == "periodic" else C.certify_antiperiodic_zone
    return fn(a, n), {"T": T, "n": n}


def _hill_instance(rng):
    T = math.pi
    p = int(rng.integers(1, 4))
    k = float(rng.uniform(p * p + 0.05, (p + 1) ** 2 - 0.05))
    room = C.hill_bound(k, p) - k * T
    g = _fourier_shape(rng, T)
    c = float(rng.uniform(0.1, 0.9)) * room / (g.integral() + 1e-6 * T)
    a = _lift(g, k + 1e-6 * c, c)
    return C.certify_hill_stability(a), {"p": p, "k": k}


def _positive_with_norm(rng, T, p, target):
    g = _fourier_shape(rng, T)
    g = _lift(g, 0.3 * g.a0 + 0.1, 1.0)
    return _lift(g, 0.0, target / lp_norm(g, p))


_P_CHOICES = (1.0, 2.0, math.inf)


def _krein_instance(rng):
    T = float(rng.uniform(0.8, 2 * math.pi))
    ps = [float(rng.choice(_P_CHOICES)) for _ in range(2)]
    b = [_positive_with_norm(rng, T, p, float(rng.uniform(0.2, 0.85)) * C.beta_antiperiodic(p, T))
         for p in ps]
    e = 0.3 * min(bi.a0 for bi in b)
    c = e * float(rng.uniform(-1, 1))
    P = MatrixCoefficient(((_lift(b[0], -e, 1.0), Constant(c, T)),
                           (Constant(c, T), _lift(b[1], -e, 1.0))))
    B = MatrixCoefficient(((b[0], Constant(0.0, T)), (Constant(0.0, T), b[1])))
    return C.certify_krein_system(P, B, ps), {"T": T, "p": ps}


def _coupling_instance(rng):
    T = float(rng.uniform(0.8, 2 * math.pi))
    p1, p2 = (float(rng.choice(_P_CHOICES)) for _ in range(2))
    b1, b2 = C.beta_antiperiodic(p1, T), C.beta_antiperiodic(p2, T)
    p11 = _positive_with_norm(rng, T, p1, float(rng.uniform(0.2, 0.8)) * b1)
    p22 = _positive_with_norm(rng, T, p2, float(rng.uniform(0.1, 0.6)) * b2)
    t = np.arange(1024) * (T / 1024)
    c = float(rng.uniform(0.0, 0.9)) * math.sqrt(float(np.min(p11(t) * p22(t))))
    P = MatrixCoefficient(((p11, Constant(c, T)), (Constant(c, T), p22)))
    return C.certify_2x2_coupling(P, p1, p2), {"T": T, "p": [p1, p2]}


def _elliptic_instance(rng, planar):
    if planar:
        domain, h = Rectangle(1.0, float(rng.choice([1.0, 1.5]))), 1 / 32
        ps = [math.inf, math.inf]
    else:
        L = float(rng.uniform(0.8, 3.0))
        domain, h = Interval(L), L / 64
        ps = [float(rng.choice([2.0, 4.0, math.inf])) for _ in range(2)]
    grid = build_grid(domain, h)
    betas = [C._beta_field(domain, h, p) for p in ps]
    x = grid.coords[:, 0] / (domain.length if not planar else domain.a_len)
    m = [float(rng.uniform(0.1, 0.35)) * bt for bt in betas]
    s = [float(rng.uniform(0.0, 0.9)) * mi for mi in m]
    c = float(rng.uniform(-0.6, 0.6)) * math.sqrt(m[0] * m[1])
    vals = np.zeros((grid.n, 2, 2))
    vals[:, 0, 0] = m[0] + s[0] * np.cos(math.pi * x)
    vals[:, 1, 1] = m[1] - s[1] * np.cos(math.pi * x)
    vals[:, 0, 1] = vals[:, 1, 0] = c
    gamma = C.choose_coupling_gamma(grid, vals, ps[0], ps[1], betas[0], betas[1])
    if gamma is None:
        return None, {}
    B = C.coupling_bound_matrix(vals, gamma)
    A = SpatialCoefficient2D(domain, h, vals)
    return C.certify_elliptic_system(A, B, ps, betas=betas), {"domain": domain.to_dict(), "p": ps}


def _disfocality_instance(rng):
    T = float(rng.uniform(0.8, 3.0))
    t0 = T * float(rng.uniform(0.3, 0.7))
    pieces = []
    for lo, hi in ((0.0, t0), (t0, T)):
        m = int(rng.integers(1, 3))
        cuts = list(np.sort(rng.uniform(lo, hi, size=m - 1))) if m > 1 else []
        crit = math.pi**2 / (4 * (hi - lo) ** 2)
        vals = rng.uniform(-0.4, 0.95, size=m) * crit
        pieces.append(([lo] + cuts, vals))
    breaks = tuple(pieces[0][0] + pieces[1][0] + [T])
    vals = tuple(np.concatenate([pieces[0][1], pieces[1][1]]))
    a = PiecewiseConstant(tuple(map(float, breaks)), tuple(map(float, vals)), T)
    if a.integral() < 0.1 * T * max(abs(v) for v in vals):
        return None, {}
    return C.two_step_disfocality(a, t0), {"T": T, "t0": t0}


CERTIFY_GENERATORS = {
    "periodic_zone": lambda rng: _zone_instance(rng, "periodic"),
    "antiperiodic_zone": lambda rng: _zone_instance(rng, "antiperiodic"),
    "hill_stability": _hill_instance,
    "krein_system": _krein_instance,
    "2x2_coupling": _coupling_instance,
    "elliptic_system": lambda rng: _elliptic_instance(rng, rng.random() < 0.2),
    "two_step_disfocality": _disfocality_instance,
}


def certificate_corpus(per_op=30, seed=2024, max_attempts=400):
    """Generate Certified instances of every certificate and collect oracle verdicts.

    Returns ``{op: {"certified": k, "attempts": m, "agree": j, "failures": [...]}}``.
    """
    out = {}
    for idx, (name, gen) in enumerate(CERTIFY_GENERATORS.items()):
        rng = np.random.default_rng([seed, idx])
        stats = {"certified": 0, "attempts": 0, "agree": 0, "failures": []}
        while stats["certified"] < per_op and stats["attempts"] < max_attempts:
            stats["attempts"] += 1
            rep, info = gen(rng)
            if rep is None or not rep.certified:
                continue
            stats["certified"] += 1
            if rep.oracle is not None and rep.oracle.confirms:
                stats["agree"] += 1
            else:
                stats["failures"].append({"info": info, "oracle": rep.oracle.to_dict()
                                          if rep.oracle else None})
        out[name] = stats
    return out


# -- criteria ------------------------------------------------------------------------


@_timed(1, "closed-form constants")
def criterion_1():
    cases = [
        (C.gamma1n_periodic(math.pi, 1).value, 4 * math.pi + 16),
        (C.gamma1n_antiperiodic(math.pi, 1).value, math.pi + 6 * math.sqrt(3)),
    ]
    for T in (0.5, 1.0, math.pi, 7.3):
        cases.append((C.gamma1n_periodic(T, 0).value, 16 / T))
        cases.append((C.gamma1n_antiperiodic(T, 0).value, 4 / T))
    err = max(abs(a - b) for a, b in cases)
    return err <= 1e-12, f"max abs error {err:.1e}", {"max_error": err, "cases": len(cases)}


@_timed(2, "M_p reproduction by minimisation")
def criterion_2(T=1.0, mesh=512):
    from .varmin import minimize_antiperiodic_quotient

    rows = {}
    ok = True
    for p in (1.5, 2.0, 4.0, 10.0):
        got = minimize_antiperiodic_quotient(p, T, mesh).value
        ref = C.mp_antiperiodic(T, p).value
        rel = abs(got / ref - 1)
        rows[str(p)] = {"minimised": got, "closed_form": ref, "rel": rel}
        ok &= rel <= 0.01
    limits = {
        "p->1+ closed form (p=1.001)": (C.mp_antiperiodic(T, 1.001).value, 4 / T),
        "p->1+ minimised (p=1.001)": (minimize_antiperiodic_quotient(1.001, T, mesh).value, 4 / T),
        "p->inf closed form (p=1e4)": (C.mp_antiperiodic(T, 1e4).value, math.pi**2 / T**2),
        "p->inf minimised (p=1e4)": (minimize_antiperiodic_quotient(1e4, T, mesh).value,
                                     math.pi**2 / T**2),
    }
    for k, (got, ref) in limits.items():
        rel = abs(got / ref - 1)
        rows[k] = {"value": got, "limit": ref, "rel": rel}
        ok &= rel <= 0.01
    worst = max(r["rel"] for r in rows.values())
    return ok, f"worst relative deviation {worst:.2e}", rows


@_timed(3, "spectral ground truth")
def criterion_3(corpus=20, seed=3, mesh=1024):
    worst0 = 0.0
    for T in (1.0, math.pi, 2.5):
        for b in Boundary:
            tab = scalar_eigenvalues(Constant(0.0, T), b, 6)
            for e in tab.eigenvalues:
                exact = free_eigenvalue(b, e.index, T)
                worst0 = max(worst0, abs(e.value - exact) / max(1.0, exact))
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(corpus):
        a = random_coefficient(rng, kind=str(rng.choice(["fourier", "samples"])))
        for b in Boundary:
            ev = scalar_eigenvalues(a, b, 6).values
            fd = discretized_scalar_eigenvalues(a, b, mesh, 6).values
            worst = max(worst, float(np.max(np.abs(ev - fd) / np.maximum(1.0, np.abs(ev)))))
    ok = worst0 <= 1e-8 and worst <= 1e-3
    return ok, f"a=0 error {worst0:.1e}; discriminant vs FD {worst:.1e}", {
        "free_max_rel_error": worst0, "corpus_max_rel_gap": worst, "corpus": corpus, "mesh": mesh}


@_timed(4, "interlacing over seeded corpus")
def criterion_4(corpus=50, seed=4, depth=2):
    rng = np.random.default_rng(seed)
    violations = []
    for i in range(corpus):
        a = random_coefficient(rng)
        rep = verify_interlacing(a, depth)
        if not rep.holds:
            violations.append({"instance": i, "violation": rep.violation, "coef": a.to_dict()})
    return not violations, f"{corpus} coefficients, {len(violations)} violations", {
        "corpus": corpus, "violations": violations}


@_timed(5, "certificate soundness")
def criterion_5(per_op=30, seed=2024):
    stats = certificate_corpus(per_op, seed)
    total = sum(s["certified"] for s in stats.values())
    agree = sum(s["agree"] for s in stats.values())
    ok = total >= 200 and agree == total and all(s["certified"] > 0 for s in stats.values())
    return ok, f"{agree}/{total} certified instances confirmed by oracles", stats


def _mathieu_certified(alpha, beta, T):
    a = Fourier(alpha, ((beta, 0.0),), T)
    if C.classical_lyapunov_check(a, oracle=False).certified:
        return "classical"
    b = rescale_period(a, math.pi)
    if C.certify_hill_stability(b, oracle=False).certified:
        return "hill"
    for n in (1, 2, 3):
        if (C.certify_periodic_zone(a, n, oracle=False).certified
                and C.certify_antiperiodic_zone(a, n, oracle=False).certified):
            return f"zones_{n}"
    return None


@_timed(6, "Mathieu sweep sanity")
def criterion_6(n_alpha=64, n_beta=64, alpha_max=4.0, beta_max=2.0, workers=1):
    T = 2 * math.pi
    alphas = np.linspace(0.0, alpha_max, n_alpha)
    betas = np.linspace(0.0, beta_max, n_beta)
    res = sweep(MathieuTemplate(T), alphas, betas, workers=workers)
    cls = res.class_grid()
    exceptions = []
    by_method = {}
    for i, al in enumerate(alphas):
        for j, be in enumerate(betas):
            how = _mathieu_certified(float(al), float(be), T)
            if how is None:
                continue
            by_method[how] = by_method.get(how, 0) + 1
            v = res.verdicts[i][j]
            stable = v is not None and (v.cls is StabilityClass.STABLE or v.coexistence)
            if not stable:
                exceptions.append((float(al), float(be), how, cls[i, j]))
    da = alphas[1] - alphas[0]
    tips = np.array([(k / 2) ** 2 for k in range(int(2 * math.sqrt(alpha_max)) + 2)])
    stray = []
    for j in (0, 1):
        for i in np.nonzero(cls[:, j] == 2)[0]:
            if np.min(np.abs(tips - alphas[i])) > da * (1 + 1e-9):
                stray.append((float(alphas[i]), float(betas[j])))
    certified = sum(by_method.values())
    ok = not exceptions and not stray and certified > 0
    return ok, (f"{certified} certified cells, {len(exceptions)} outside stable region, "
                f"{len(stray)} stray tongue cells"), {
        "certified_by": by_method, "exceptions": exceptions, "stray_unstable": stray,
        "grid": [n_alpha, n_beta], "failed_cells": len(res.errors)}


@_timed(7, "Neumann eigenvalues (square, disc)")
def criterion_7(h=1 / 128):
    sq = neumann_lambda1(Rectangle(1.0, 1.0), h)
    disc = neumann_lambda1(Disc(1.0), h)
    ref_disc = float(jnp_zeros(1, 1)[0]) ** 2
    e_sq, e_disc = abs(sq / math.pi**2 - 1), abs(disc / ref_disc - 1)
    return e_sq <= 0.005 and e_disc <= 0.01, f"square {e_sq:.1e}, disc {e_disc:.1e}", {
        "square": sq, "disc": disc, "disc_reference": ref_disc, "h": h}


@_timed(8, "beta_p structure")
def criterion_8(h=1 / 32):
    from .varmin import beta1_vanishing_family, minimize_neumann_constrained

    sq = Rectangle(1.0, 1.0)
    ps = (1.5, 2.0, 3.0, 6.0)
    betas = [minimize_neumann_constrained(p, sq, h=h).value for p in ps]
    betas.append(neumann_lambda1(sq, h))
    scaled = [b * sq.measure ** (-1 / p) if math.isfinite(p) else b
              for b, p in zip(betas, ps + (math.inf,))]
    mono = all(b1 > b0 for b0, b1 in zip(scaled, scaled[1:]))
    fam = [beta1_vanishing_family(Disc(1.0), k) for k in range(1, 7)]
    ratio = fam[0].l1_positive / fam[-1].l1_positive
    resid = max(m.residual for m in fam)
    cex = [mean_nonnegativity_counterexample(Disc(1.0), n, 1 / 16) for n in (1, 2, 4, 8, 16)]
    integrals = [c.integral for c in cex]
    sups = [c.norms[math.inf] for c in cex]
    cex_ok = all(i < 0 for i in integrals) and all(b < a for a, b in zip(sups, sups[1:])) \
        and sups[-1] <= sups[0] / 8
    ok = mono and ratio >= 5 and resid <= 1e-6 and cex_ok
    return ok, (f"monotone={mono}, l1 ratio {ratio:.2f}, residual {resid:.1e}, "
                f"counterexample ok={cex_ok}"), {
        "scaled_betas": dict(zip(map(str, ps + (math.inf,)), scaled)),
        "family_l1": [m.l1_positive for m in fam], "family_residual": resid,
        "counterexample_integrals": integrals, "counterexample_sup": sups}


def tanh_blend_spec(T=1.0):
    """Scalar saturated instance used by criterion 9 (and the CLI example)."""
    from .resonant import NonlinearitySpec

    lam = (math.pi / T) ** 2
    b = Fourier(0.5 * lam, ((0.2 * lam, 0.0),), T)
    forcing = Fourier(0.0, ((0.3, 0.0), (0.0, 0.1)), T)
    return NonlinearitySpec("saturated", b=(b,), forcing=(forcing,))


@_timed(9, "resonant solver")
def criterion_9(T=1.0, cells=256):
    from .resonant import check_hypotheses, newton_solve, solve, uniqueness_probe

    dom, h = Interval(T), T / cells
    spec = tanh_blend_spec(T)
    rep = check_hypotheses(spec, dom, h)
    sol = solve(spec, dom, h, tol=1e-12)
    nw = newton_solve(spec, dom, h)
    diff = float(np.abs(sol.u - nw.u).max())
    probe = uniqueness_probe(spec, dom, h, starts=5, seed=9)
    ok = rep.certified and sol.residual <= 1e-8 and diff <= 1e-6 and probe.spread <= 1e-7
    return ok, (f"residual {sol.residual:.1e}, Newton gap {diff:.1e}, "
                f"spread {probe.spread:.1e}"), {
        "certified": rep.certified, "iterations": sol.iterations, "residual": sol.residual,
        "newton_gap": diff, "spread": probe.spread}


@_timed(10, "numerical hygiene")
def criterion_10(prior_seconds=None, seed=10):
    from .varmin import minimize_neumann_constrained

    rng = np.random.default_rng(seed)
    coefs = [Fourier(1.0, ((0.5, 0.0),), 2 * math.pi)] + [random_coefficient(rng) for _ in range(5)]
    det_err = max(abs(monodromy(a).det - 1) for a in coefs)
    P = MatrixCoefficient(((Fourier(1.0, ((0.3, 0.0),), 2.0), Constant(0.2, 2.0)),
                           (Constant(0.2, 2.0), Constant(2.0, 2.0))))
    det_err = max(det_err, abs(monodromy(P).det - 1))
    order, _ = measured_order(Fourier(1.0, ((0.5, 0.2),), 2 * math.pi))
    cres = []
    for p in (1.5, 3.0):
        cres.append(minimize_neumann_constrained(p, Interval(1.0), mesh=256).constraint_residual)
    cres.append(minimize_neumann_constrained(2.0, Rectangle(1.0, 1.0), h=1 / 32).constraint_residual)
    worst_c = max(cres)
    timing_ok = True if prior_seconds is None else prior_seconds <= SELFTEST_BUDGET
    ok = det_err <= 1e-8 and 3.5 <= order <= 4.5 and worst_c <= 1e-10 and timing_ok
    timing = "n/a" if prior_seconds is None else f"{prior_seconds:.0f} s"
    return ok, (f"|det-1| {det_err:.1e}, order {order:.2f}, constraint {worst_c:.1e}, "
                f"criteria 1-9 {timing}"), {
        "det_error": det_err, "order": order, "constraint_residuals": cres,
        "criteria_seconds": prior_seconds, "budget_seconds": SELFTEST_BUDGET}


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10}


def run_all(selected=None, echo=None):
    """Run the selected criteria (default all) in order; ``echo`` receives each line."""
    selected = sorted(selected or CRITERIA)
    results = []
    spent = 0.0
    for k in selected:
        if k == 10:
            prior = spent if all(i in selected for i in range(1, 10)) else None
            r = CRITERIA[10](prior_seconds=prior)
        else:
            r = CRITERIA[k]()
        spent += r.seconds
        results.append(r)
        if echo:
            echo(r.line())
    return results

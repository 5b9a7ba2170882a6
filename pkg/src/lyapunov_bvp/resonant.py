"""Resonant Neumann problems ``Delta u + G_u(x, u) = 0`` (scalar or systems).

The nonlinearity is written through its gradient ``G_u`` and Hessian
``G_uu``. When ``A(x) <= G_uu <= B(x)`` with ``B`` diagonal, the diagonal
entries of ``B`` below the Lyapunov constants and ``int A`` positive
definite, the problem has exactly one solution. It is computed as the
fixed point of ``y -> u_y``, where ``u_y`` solves the frozen linear problem

    Delta u + D(x, y) u + G_u(x, 0) = 0,   D(x, z) = int_0^1 G_uu(x, t z) dt.

An independent damped Newton iteration on the full nonlinear system is
available as a cross-check.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.optimize import brentq

from .coeffs import ScalarCoefficient, SpatialCoefficient2D
from .errors import MaxIterExceeded, NearSingular
from .grids import Interval, build_grid
from .pde import (Nontriviality, _factor_solve, _system_operator, detect_nontrivial,
                  lp_norm_field, neumann_lambda1)
from .report import CertificateReport, HypothesisCheck

__all__ = [
    "CustomTable",
    "NonlinearitySpec",
    "ResonantSolution",
    "UniquenessReport",
    "check_hypotheses",
    "solve",
    "newton_solve",
    "uniqueness_probe",
    "lyapunov_beta",
]

S0_WINDOW = 1e6
_THETA_X, _THETA_W = np.polynomial.legendre.leggauss(16)
_THETA_X = 0.5 * (_THETA_X + 1.0)
_THETA_W = 0.5 * _THETA_W


def _nodal(f, grid):
    """Evaluate a field description at the grid nodes."""
    if f is None:
        return np.zeros(grid.n)
    if isinstance(f, SpatialCoefficient2D):
        return np.asarray(f.values, dtype=float)
    if isinstance(f, ScalarCoefficient):
        return np.asarray(f(grid.coords[:, 0]), dtype=float)
    if callable(f):
        args = [grid.coords[:, k] for k in range(grid.coords.shape[1])]
        return np.broadcast_to(np.asarray(f(*args), dtype=float), (grid.n,)).copy()
    arr = np.asarray(f, dtype=float)
    if arr.ndim == 0:
        return np.full(grid.n, float(arr))
    if arr.shape != (grid.n,):
        raise ValueError(f"field has {arr.shape} values, grid has {grid.n} nodes")
    return arr


@dataclass(frozen=True)
class CustomTable:
    """Tabulated scalar ``G_u`` and ``G_uu`` on a ``(x, u)`` grid.

    ``x`` may be omitted (x-independent table, rows of length ``len(u)``).
    Values are interpolated linearly; outside the ``u`` range ``G_u`` is
    extended linearly with the end value of ``G_uu``.
    """

    u: tuple
    gu: tuple
    guu: tuple
    x: tuple | None = None

    def _arrays(self):
        u = np.asarray(self.u, dtype=float)
        gu = np.atleast_2d(np.asarray(self.gu, dtype=float))
        guu = np.atleast_2d(np.asarray(self.guu, dtype=float))
        if gu.shape != guu.shape or gu.shape[1] != u.size:
            raise ValueError("G_u and G_uu tables must share the (x, u) grid")
        if np.any(np.diff(u) <= 0):
            raise ValueError("u grid must be increasing")
        return u, gu, guu

    def consistency(self):
        """Max mismatch between ``G_uu`` and divided differences of ``G_u``."""
        u, gu, guu = self._arrays()
        slope = np.diff(gu, axis=1) / np.diff(u)
        avg = 0.5 * (guu[:, 1:] + guu[:, :-1])
        return float(np.abs(slope - avg).max() / max(1.0, np.abs(guu).max()))

    def evaluator(self, grid):
        u, gu, guu = self._arrays()
        if self.x is None:
            if gu.shape[0] != 1:
                raise ValueError("x-dependent tables need an x grid")
            rows_u, rows_uu = (lambda xs: np.repeat(gu, xs, 0)), (lambda xs: np.repeat(guu, xs, 0))
            gu_n, guu_n = rows_u(grid.n), rows_uu(grid.n)
        else:
            if grid.coords.shape[1] != 1:
                raise ValueError("x-dependent tables are supported on intervals only")
            xg = np.asarray(self.x, dtype=float)
            xs = grid.coords[:, 0]
            gu_n = RegularGridInterpolator((xg,), gu, bounds_error=False, fill_value=None)(xs)
            guu_n = RegularGridInterpolator((xg,), guu, bounds_error=False, fill_value=None)(xs)
        du = np.diff(u)

        def G_u(U):
            U = np.asarray(U, dtype=float)
            out = np.empty(grid.n)
            idx = np.clip(np.searchsorted(u, U) - 1, 0, u.size - 2)
            rows = np.arange(grid.n)
            w = (U - u[idx]) / du[idx]
            out = (1 - w) * gu_n[rows, idx] + w * gu_n[rows, idx + 1]
            lo, hi = U < u[0], U > u[-1]
            out[lo] = gu_n[lo, 0] + guu_n[lo, 0] * (U[lo] - u[0])
            out[hi] = gu_n[hi, -1] + guu_n[hi, -1] * (U[hi] - u[-1])
            return out

        def G_uu(U):
            U = np.clip(np.asarray(U, dtype=float), u[0], u[-1])
            idx = np.clip(np.searchsorted(u, U) - 1, 0, u.size - 2)
            rows = np.arange(grid.n)
            w = (U - u[idx]) / du[idx]
            return (1 - w) * guu_n[rows, idx] + w * guu_n[rows, idx + 1]

        return G_u, G_uu, (float(u[0]), float(u[-1]))

    def to_dict(self):
        return {"u": list(self.u), "gu": np.asarray(self.gu).tolist(),
                "guu": np.asarray(self.guu).tolist(), "x": None if self.x is None else list(self.x)}


@dataclass(frozen=True)
class NonlinearitySpec:
    """Description of ``G_u`` for ``Delta u + G_u(x, u) = 0``.

    Kinds
    -----
    ``linear``
        ``G_u = b_i(x) u_i``.
    ``saturated``
        ``G_u = b_i(x) ((u_i - s0_i) + tanh(u_i - s0_i)) / 2``, so that
        ``b_i / 2 <= d G_u / d u_i <= b_i``.
    ``custom``
        Scalar tabulated ``G_u`` and ``G_uu`` (see :class:`CustomTable`).

    In every kind a constant symmetric ``coupling`` matrix ``C`` adds
    ``C u`` and a ``forcing`` field ``h_i(x)`` is added to component ``i``.
    ``lower`` (matrix of fields, ``A``) and ``upper`` (diagonal fields,
    ``B``) are the declared bounds; when omitted they are derived from the
    kind. ``p`` gives the exponent for each diagonal bound.
    """

    kind: str
    b: tuple = (1.0,)
    s0: tuple | None = None
    coupling: tuple | None = None
    forcing: tuple | None = None
    p: tuple | None = None
    lower: tuple | None = None
    upper: tuple | None = None
    table: CustomTable | None = None

    def __post_init__(self):
        if self.kind not in ("linear", "saturated", "custom"):
            raise ValueError(f"unknown nonlinearity kind {self.kind!r}")
        if self.kind == "custom":
            if self.table is None:
                raise ValueError("custom kind needs a table")
            if self.n != 1:
                raise ValueError("custom tables describe scalar problems")
        if self.coupling is not None:
            C = np.asarray(self.coupling, dtype=float)
            if C.shape != (self.n, self.n) or not np.allclose(C, C.T):
                raise ValueError("coupling must be a symmetric n x n matrix")
        for name in ("s0", "forcing", "p", "upper"):
            val = getattr(self, name)
            if val is not None and len(val) != self.n:
                raise ValueError(f"{name} needs one entry per component")

    @property
    def n(self):
        return len(self.b)

    @property
    def exponents(self):
        return tuple(math.inf if q is None else float(q) for q in (self.p or (None,) * self.n))

    def to_dict(self):
        def f(v):
            if isinstance(v, (int, float)):
                return v
            if hasattr(v, "to_dict"):
                return v.to_dict()
            return getattr(v, "__name__", type(v).__name__)

        return {"kind": self.kind, "n": self.n, "b": [f(v) for v in self.b],
                "s0": list(self.s0) if self.s0 else None,
                "coupling": None if self.coupling is None else np.asarray(self.coupling).tolist(),
                "forcing": None if self.forcing is None else [f(v) for v in self.forcing],
                "p": [str(q) for q in self.exponents],
                "table": self.table.to_dict() if self.table else None}


class _Bound:
    """A spec evaluated on a grid: ``G_u(U)`` and ``G_uu(U)`` for ``U`` of shape (nodes, n)."""

    def __init__(self, spec, grid):
        self.spec, self.grid, self.n = spec, grid, spec.n
        self.b = np.stack([_nodal(f, grid) for f in spec.b], axis=1)
        self.s0 = np.asarray(spec.s0 if spec.s0 is not None else [0.0] * self.n, dtype=float)
        self.C = np.zeros((self.n, self.n)) if spec.coupling is None \
            else np.asarray(spec.coupling, dtype=float)
        self.h = np.zeros((grid.n, self.n)) if spec.forcing is None \
            else np.stack([_nodal(f, grid) for f in spec.forcing], axis=1)
        self.u_range = None
        if spec.kind == "custom":
            self._tu, self._tuu, self.u_range = spec.table.evaluator(grid)

    def _diag(self, U):
        if self.spec.kind == "linear":
            return self.b * U, self.b.copy()
        if self.spec.kind == "saturated":
            z = U - self.s0
            th = np.tanh(z)
            return 0.5 * self.b * (z + th), 0.5 * self.b * (2.0 - th**2)
        return self._tu(U[:, 0])[:, None], self._tuu(U[:, 0])[:, None]

    def G_u(self, U):
        d, _ = self._diag(U)
        return d + U @ self.C.T + self.h

    def G_uu(self, U):
        _, dd = self._diag(U)
        H = np.zeros((U.shape[0], self.n, self.n)) + self.C
        idx = np.arange(self.n)
        H[:, idx, idx] += dd
        return H

    def D(self, Z):
        """``int_0^1 G_uu(x, t Z) dt``.

        Analytic kinds use 16-point Gauss-Legendre in ``t``; tables use the
        secant of the interpolated ``G_u``, which is the exact value of the
        integral for the interpolant.
        """
        if self.spec.kind == "linear":
            return self.G_uu(Z)
        if self.spec.kind == "custom":
            # exact secant of the interpolated table, consistent with G_u
            z = Z[:, 0]
            small = np.abs(z) <= 1e-8
            zs = np.where(small, 1.0, z)
            sec = (self._tu(z) - self._tu(np.zeros_like(z))) / zs
            d = np.where(small, self._tuu(0.5 * z), sec)
            return (d[:, None, None] + self.C).reshape(-1, 1, 1)
        out = np.zeros((Z.shape[0], self.n, self.n))
        for t, w in zip(_THETA_X, _THETA_W):
            out += w * self.G_uu(t * Z)
        return out

    def default_lower(self):
        if self.spec.lower is not None:
            return np.stack([np.stack([_nodal(f, self.grid) for f in row], axis=1)
                             for row in self.spec.lower], axis=1)
        A = np.zeros((self.grid.n, self.n, self.n)) + self.C
        idx = np.arange(self.n)
        if self.spec.kind == "linear":
            A[:, idx, idx] += self.b
        elif self.spec.kind == "saturated":
            A[:, idx, idx] += 0.5 * self.b
        else:
            _, guu = self.spec.table._arrays()[1:]
            lo = float(guu.min())
            A[:, 0, 0] += lo
        return A

    def default_upper(self):
        if self.spec.upper is not None:
            return np.stack([_nodal(f, self.grid) for f in self.spec.upper], axis=1)
        off = np.abs(self.C).sum(axis=1) - np.abs(np.diag(self.C)) + np.diag(self.C)
        if self.spec.kind in ("linear", "saturated"):
            return self.b + off
        _, guu = self.spec.table._arrays()[1:]
        return np.full((self.grid.n, 1), float(guu.max())) + off


def lyapunov_beta(domain, h, p):
    """``beta_p`` for the Neumann problem on ``domain``.

    ``p = inf`` uses the first nonzero discrete Neumann eigenvalue; finite
    ``p`` uses the closed form on an interval and the constrained
    minimisation on 2D grids.
    """
    p = float(p)
    if math.isinf(p):
        return neumann_lambda1(domain, h)
    if isinstance(domain, Interval):
        from .constants import mp_antiperiodic

        return mp_antiperiodic(domain.length, p).value
    from .varmin import neumann_beta

    return neumann_beta(domain, float(h), p)


def check_hypotheses(spec, domain, h, u_box=10.0, u_samples=41, tol=1e-10):
    """Check the uniqueness/existence hypotheses on the grid.

    Sampled checks use the grid nodes and ``u_samples`` values per
    component in ``[-u_box, u_box]`` (constant states, plus the table
    nodes for custom kinds). Scalar problems whose lower bound has zero
    mean are accepted through the alternative set of conditions: a
    nonnegative ``G_uu``, a state ``s0`` with ``int G_u(x, s0) = 0`` and a
    ``G_uu`` that does not vanish identically on the samples.
    """
    grid = build_grid(domain, float(h))
    ev = _Bound(spec, grid)
    n = spec.n
    A = ev.default_lower()
    B = ev.default_upper()
    checks = []

    s = np.linspace(-u_box, u_box, u_samples)
    if ev.u_range is not None:
        s = np.union1d(s, np.asarray(spec.table.u, dtype=float))
    worst_lo = worst_hi = 0.0
    nonvanishing = True
    for val in s:
        U = np.full((grid.n, n), val)
        H = ev.G_uu(U)
        lo = np.linalg.eigvalsh(H - A).min()
        hi = np.linalg.eigvalsh(B[:, :, None] * np.eye(n) - H).min()
        worst_lo, worst_hi = min(worst_lo, lo), min(worst_hi, hi)
        if not np.any(np.abs(H) > tol):
            nonvanishing = False
    if n > 1:
        # random mixed states, since the coupling sees all components
        rng = np.random.default_rng(0)
        for _ in range(8):
            U = rng.uniform(-u_box, u_box, size=(grid.n, n))
            H = ev.G_uu(U)
            worst_lo = min(worst_lo, np.linalg.eigvalsh(H - A).min())
            worst_hi = min(worst_hi, np.linalg.eigvalsh(B[:, :, None] * np.eye(n) - H).min())
    scale = max(1.0, float(np.abs(B).max()))
    checks.append(HypothesisCheck("lower bound A <= G_uu (sampled)", bool(worst_lo >= -tol * scale),
                                  float(worst_lo), 0.0))
    checks.append(HypothesisCheck("G_uu <= B (sampled)", bool(worst_hi >= -tol * scale),
                                  float(worst_hi), 0.0))
    if spec.kind == "custom":
        cons = spec.table.consistency()
        checks.append(HypothesisCheck("table G_uu matches divided differences of G_u",
                                      bool(cons <= 1e-4), cons, 1e-4))

    betas = []
    for i, p in enumerate(spec.exponents):
        if not p > domain.dim / 2:
            checks.append(HypothesisCheck(f"p_{i + 1} > N/2", False, p, domain.dim / 2))
            continue
        beta = lyapunov_beta(domain, h, p)
        betas.append(beta)
        nrm = lp_norm_field(grid, B[:, i], p, positive_part=True)
        checks.append(HypothesisCheck(f"|b_{i + 1}^+|_{p} < beta_p", bool(nrm < beta), nrm, beta))

    intA = np.einsum("i,ijk->jk", grid.weights, A)
    min_eig = float(np.linalg.eigvalsh(intA).min())
    metadata = {"u_box": u_box, "u_samples": int(s.size), "h": float(h),
                "domain": domain.to_dict(), "betas": betas}
    if n == 1 and min_eig <= tol * scale:
        theorem = "scalar resonant problem (zero-mean state)"
        checks.append(HypothesisCheck("G_uu >= 0 (sampled)",
                                      bool(worst_lo >= -tol * scale and np.all(A >= -tol)),
                                      float(A.min()), 0.0))

        def phi(c):
            return grid.integrate(ev.G_u(np.full((grid.n, 1), c))[:, 0])

        s0 = None
        try:
            lo, hi = phi(-S0_WINDOW), phi(S0_WINDOW)
            if lo == 0.0:
                s0 = -S0_WINDOW
            elif hi == 0.0:
                s0 = S0_WINDOW
            elif lo * hi < 0:
                s0 = brentq(phi, -S0_WINDOW, S0_WINDOW, xtol=1e-13, rtol=1e-14, maxiter=400)
        except (ValueError, FloatingPointError):
            s0 = None
        checks.append(HypothesisCheck("exists s0 with int G_u(x, s0) = 0", s0 is not None, s0,
                                      [-S0_WINDOW, S0_WINDOW]))
        checks.append(HypothesisCheck("G_uu not identically zero (sampled constants)", nonvanishing,
                                      note="checked on constant states only"))
        metadata["s0"] = s0
    else:
        theorem = "resonant Neumann system (positive definite mean lower bound)"
        checks.append(HypothesisCheck("int A positive definite", bool(min_eig > tol * scale),
                                      min_eig, 0.0))
        if n == 1:
            def phi(c):
                return grid.integrate(ev.G_u(np.full((grid.n, 1), c))[:, 0])

            try:
                metadata["s0"] = brentq(phi, -S0_WINDOW, S0_WINDOW, xtol=1e-13, rtol=1e-14,
                                        maxiter=400)
            except ValueError:
                metadata["s0"] = None
    return CertificateReport.from_checks(theorem, checks,
                                         {"unique_solution": True, "domain": domain.to_dict()},
                                         metadata=metadata)


@dataclass
class ResonantSolution:
    u: np.ndarray  # (nodes,) for scalar problems, (nodes, n) for systems
    iterations: int
    residual: float
    converged: bool
    damped: bool
    history: list = field(default_factory=list)
    coords: np.ndarray | None = None
    method: str = "fixed point"

    def to_dict(self):
        return {"iterations": self.iterations, "residual": self.residual,
                "converged": self.converged, "damped": self.damped,
                "history": list(self.history), "method": self.method}


def _residual(grid, ev, U):
    lap = -(grid.K @ U) / grid.weights[:, None]
    return float(np.abs(lap + ev.G_u(U)).max())


def _prepare(spec, domain, h):
    grid = build_grid(domain, float(h))
    return grid, _Bound(spec, grid)


def _shape_out(U, n):
    return U[:, 0].copy() if n == 1 else U.copy()


def solve(spec, domain, h, max_iter=200, tol=1e-12, start=None, check=True, damping=None):
    """Fixed-point iteration ``y -> u_y`` for ``Delta u + G_u(x, u) = 0``.

    Each step solves ``Delta u + D(x, y) u = -G_u(x, 0)``. A damping
    factor of 0.5 is switched on after the first step whose update grows
    (``damping`` forces it from the start). The iteration stops when
    ``|y_{k+1} - y_k|_inf <= tol``.

    Raises
    ------
    MaxIterExceeded
        The cap was reached; ``best`` is the iterate with the smallest
        residual.
    NearSingular
        A frozen linear problem was (numerically) singular.
    """
    grid, ev = _prepare(spec, domain, h)
    n = spec.n
    Y = np.zeros((grid.n, n)) if start is None else np.asarray(start, dtype=float).reshape(grid.n, n)
    g0 = ev.G_u(np.zeros((grid.n, n)))
    omega = 1.0 if damping is None else float(damping)
    damped = damping is not None
    prev = math.inf
    history = []
    best = None
    for it in range(1, max_iter + 1):
        D = ev.D(Y)
        vals = D[:, 0, 0] if n == 1 else D
        if check and it == 1:
            res = detect_nontrivial(domain, vals, h)
            if res.verdict is Nontriviality.NONTRIVIAL:
                raise NearSingular("frozen linear problem is near singular",
                                   sigma_min=res.sigma_min)
        A, _ = _system_operator(grid, vals, symmetric=False)
        rhs = (grid.weights[:, None] * g0).ravel()
        U = _factor_solve(A, rhs).reshape(grid.n, n)
        step = float(np.abs(U - Y).max())
        if step > prev and not damped:
            damped, omega = True, 0.5
        Ynew = Y + omega * (U - Y) if damped else U
        history.append(step)
        prev = step
        Y = Ynew
        if best is None or step < best[0]:
            best = (step, Y.copy())
        if step <= tol:
            r = _residual(grid, ev, Y)
            return ResonantSolution(_shape_out(Y, n), it, r, True, damped, history, grid.coords)
        if not np.all(np.isfinite(Y)):
            break
    r = _residual(grid, ev, best[1])
    raise MaxIterExceeded(f"fixed-point iteration did not converge in {max_iter} steps",
                          best=ResonantSolution(_shape_out(best[1], n), max_iter, r, False, damped,
                                                history, grid.coords))


def newton_solve(spec, domain, h, max_iter=100, tol=1e-12, start=None):
    """Damped Newton iteration on ``-K u / W + G_u(x, u) = 0`` (independent oracle)."""
    grid, ev = _prepare(spec, domain, h)
    n = spec.n
    U = np.zeros((grid.n, n)) if start is None else np.asarray(start, dtype=float).reshape(grid.n, n)

    def F(U):
        return (-(grid.K @ U) / grid.weights[:, None] + ev.G_u(U)).ravel()

    f = F(U)
    for it in range(1, max_iter + 1):
        H = ev.G_uu(U)
        vals = H[:, 0, 0] if n == 1 else H
        J, _ = _system_operator(grid, vals, symmetric=False)  # K - W H
        delta = _factor_solve(J, (grid.weights[:, None] * f.reshape(grid.n, n)).ravel())
        # J delta = W F  <=>  (-K/W + H) (-delta) = F, so the Newton step is +delta
        t = 1.0
        nf = np.abs(f).max()
        while t > 1e-8:
            Un = U + t * delta.reshape(grid.n, n)
            fn = F(Un)
            if np.abs(fn).max() <= (1 - 1e-4 * t) * nf or nf < 1e-13:
                break
            t *= 0.5
        U, f = Un, fn
        if np.abs(t * delta).max() <= tol:
            return ResonantSolution(_shape_out(U, n), it, float(np.abs(f).max()), True, t < 1,
                                    coords=grid.coords, method="damped Newton")
    raise MaxIterExceeded("Newton iteration did not converge",
                          best=ResonantSolution(_shape_out(U, n), max_iter, float(np.abs(f).max()),
                                                False, True, coords=grid.coords,
                                                method="damped Newton"))


@dataclass(frozen=True)
class UniquenessReport:
    starts: int
    seed: int
    spread: float
    residuals: tuple
    iterations: tuple
    accepted: bool
    reason: str = ""

    def to_dict(self):
        return dict(self.__dict__, residuals=list(self.residuals), iterations=list(self.iterations))


def uniqueness_probe(spec, domain, h, starts=5, seed=0, scale=1.0, tol=1e-12, max_iter=200,
                     workers=1):
    """Solve from ``starts`` seeded random fields and report the largest spread.

    Specs failing :func:`check_hypotheses` are rejected without solving.
    """
    report = check_hypotheses(spec, domain, h)
    if not report.certified:
        return UniquenessReport(starts, seed, math.nan, (), (), False,
                                "hypotheses not certified: " + report.reason)
    grid = build_grid(domain, float(h))
    base = solve(spec, domain, h, max_iter=max_iter, tol=tol)
    rng = np.random.default_rng(seed)
    inits = [scale * rng.standard_normal((grid.n, spec.n)) for _ in range(starts)]

    def run(y0):
        return solve(spec, domain, h, max_iter=max_iter, tol=tol, start=y0, check=False)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            sols = list(pool.map(run, inits))
    else:
        sols = [run(y0) for y0 in inits]
    all_sols = [base] + sols
    spread = 0.0
    for i in range(len(all_sols)):
        for j in range(i + 1, len(all_sols)):
            spread = max(spread, float(np.abs(all_sols[i].u - all_sols[j].u).max()))
    return UniquenessReport(starts, seed, spread, tuple(s.residual for s in all_sols),
                            tuple(s.iterations for s in all_sols), True)

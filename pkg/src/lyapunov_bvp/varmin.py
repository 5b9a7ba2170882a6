"""Direct minimisation of Lyapunov-type variational quotients.

The main quotient is::

    Q(v) = int |v'|^2 / |v|_q^2,      q = 2p / (p - 1)

over antiperiodic functions (``v(0) + v(T) = 0``) or, for Neumann
problems, over functions satisfying ``int |v|^(q-2) v = 0``. Its minimum
is the best ``L^p`` Lyapunov constant (``p = inf`` gives ``q = 2``, the
first eigenvalue; ``p = 1`` gives ``q = inf``).

1D problems use continuous piecewise-linear elements with the power
integrals evaluated by Gauss-Legendre rules split at sign changes, so
that values and gradients are consistent. 2D grids use the lumped nodal
quadrature of :mod:`grids`. Minimisation is gradient descent in the
Sobolev metric (the gradient is preconditioned by the stiffness matrix,
shifted by the mass for Neumann problems) with Armijo backtracking.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import brentq

from .grids import Disc, Interval, build_grid

__all__ = [
    "MinimizationResult",
    "minimize_antiperiodic_quotient",
    "minimize_neumann_constrained",
    "neumann_beta",
    "mixed_quotient_min",
    "cot_sum_min",
    "beta1_vanishing_family",
    "scaling_law_check",
]

ARMIJO = 1e-4
COARSE_GTOL = 1e-6
STALL_GTOL = 1e-6
_GL_X, _GL_W = np.polynomial.legendre.leggauss(6)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


@dataclass
class MinimizationResult:
    value: float
    minimizer: np.ndarray
    constraint_residual: float
    mesh_sizes: list
    trace: list
    iterations: int
    converged: bool
    euler_residual: float
    coords: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "value": self.value,
            "constraint_residual": self.constraint_residual,
            "mesh_sizes": list(self.mesh_sizes),
            "trace": list(self.trace),
            "iterations": self.iterations,
            "converged": self.converged,
            "euler_residual": self.euler_residual,
            "metadata": self.metadata,
        }


def _q_of_p(p):
    p = float(p)
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 2.0
    return 2 * p / (p - 1)


# -- discretisations -----------------------------------------------------------


class _P1Line:
    """Piecewise-linear functions on a uniform 1D mesh.

    ``antiperiodic`` meshes have ``N`` unknowns with ``v_N = -v_0``;
    Neumann meshes have ``N + 1`` unknowns.
    """

    def __init__(self, T, N, antiperiodic):
        self.T, self.N, self.anti = float(T), int(N), antiperiodic
        self.h = self.T / self.N
        e = np.arange(self.N)
        if antiperiodic:
            self.size = self.N
            self.il, self.ir = e, (e + 1) % self.N
            self.sr = np.where(e == self.N - 1, -1.0, 1.0)
        else:
            self.size = self.N + 1
            self.il, self.ir = e, e + 1
            self.sr = np.ones(self.N)
        rows = np.concatenate([self.il, self.ir, self.il, self.ir])
        cols = np.concatenate([self.ir, self.il, self.il, self.ir])
        k = 1.0 / self.h
        vals = np.concatenate([-k * self.sr, -k * self.sr, np.full(self.N, k), np.full(self.N, k)])
        self.K = sp.csr_matrix((vals, (rows, cols)), shape=(self.size, self.size))
        mvals = np.concatenate([self.h / 6 * self.sr, self.h / 6 * self.sr,
                                np.full(self.N, self.h / 3), np.full(self.N, self.h / 3)])
        self.M = sp.csr_matrix((mvals, (rows, cols)), shape=(self.size, self.size))
        P = self.K if antiperiodic else self.K + self.M
        self._prec = spla.splu(P.tocsc())
        self.kernel_free = antiperiodic

    @property
    def coords(self):
        return np.arange(self.size) * self.h

    def precondition(self, g):
        return self._prec.solve(g)

    def power(self, v, q):
        """(int |v|^q, gradient with respect to the nodal values)."""
        l = v[self.il]
        r = self.sr * v[self.ir]
        cross = (l * r) < 0
        s = np.where(cross, l / np.where(cross, l - r, 1.0), 1.0)
        total = 0.0
        gl = np.zeros_like(l)
        gr = np.zeros_like(r)
        for a, b in ((np.zeros_like(s), s), (s, np.ones_like(s))):
            ln = b - a
            x = a[:, None] + ln[:, None] * _GL_X[None, :]
            y = l[:, None] + (r - l)[:, None] * x
            ay = np.abs(y)
            w = self.h * ln[:, None] * _GL_W[None, :]
            total += float(np.sum(w * ay**q))
            dy = q * ay ** (q - 1) * np.sign(y) * w
            gl += np.sum(dy * (1 - x), axis=1)
            gr += np.sum(dy * x, axis=1)
        grad = np.zeros(self.size)
        np.add.at(grad, self.il, gl)
        np.add.at(grad, self.ir, gr * self.sr)
        return total, grad

    def prolong(self, v):
        """Interpolate onto the mesh with twice as many elements."""
        fine = _P1Line(self.T, 2 * self.N, self.anti)
        out = np.empty(fine.size)
        out[0::2] = v[: (self.N if self.anti else self.N + 1)]
        right = self.sr * v[self.ir]
        out[1::2] = 0.5 * (v[self.il] + right)
        return fine, out


class _LumpedGrid:
    """Nodal values on a Neumann grid with lumped quadrature."""

    def __init__(self, grid):
        self.grid = grid
        self.K = grid.K
        self.w = np.asarray(grid.weights)
        self.size = grid.n
        self.M = sp.diags(self.w)
        self._prec = spla.splu((self.K + self.M).tocsc())
        self.kernel_free = False

    @property
    def coords(self):
        return self.grid.coords

    def precondition(self, g):
        return self._prec.solve(g)

    def power(self, v, q):
        av = np.abs(v)
        total = float(np.dot(self.w, av**q))
        grad = q * self.w * av ** (q - 1) * np.sign(v)
        return total, grad


# -- core descent --------------------------------------------------------------


def _shift_root(disc, v, q):
    """``c`` with ``int |v - c|^(q-2) (v - c) = 0`` (the minimiser of ``int |v - c|^q``)."""
    ones = np.ones_like(v)
    if q == 2.0:
        _, g = disc.power(v, 2.0)
        _, g1 = disc.power(ones, 2.0)
        return float(np.dot(g, ones) / np.dot(g1, ones))

    lo, hi = float(v.min()), float(v.max())
    if lo == hi:
        return lo

    def phi(c):
        # a positive rescaling keeps the sign; scaling by the largest value
        # avoids overflow and keeps the dominant side from underflowing
        w = v - c
        _, g = disc.power(w / np.abs(w).max(), q)
        return float(np.sum(g))

    return brentq(phi, lo, hi, xtol=1e-15 * (abs(hi) + abs(lo)), rtol=1e-15, maxiter=500)


def _constraint_residual(disc, v, q):
    _, g = disc.power(v, q)
    denom = float(np.sum(np.abs(g)))
    return abs(float(np.sum(g))) / denom if denom > 0 else 0.0


class _Problem:
    def __init__(self, disc, q, constrained):
        self.disc, self.q, self.constrained = disc, q, constrained

    def project(self, v):
        v = v / np.abs(v).max()  # the quotient is scale invariant; avoid overflow in |v|^q
        if self.constrained:
            v = v - _shift_root(self.disc, v, self.q)
            v = v / np.abs(v).max()
        nrm, _ = self.disc.power(v, self.q)
        return v / nrm ** (1.0 / self.q)

    def evaluate(self, v):
        Kv = self.disc.K @ v
        num = float(np.dot(v, Kv))
        N, dN = self.disc.power(v, self.q)
        D = N ** (2.0 / self.q)
        Q = num / D
        g = 2 * Kv / D - (2.0 / self.q) * Q * dN / N
        return Q, g


def _residual(problem, Q, g):
    """Euler-Lagrange residual ``|g|_{P^-1} / (2 sqrt(Q))`` in the Sobolev dual norm."""
    d = problem.disc.precondition(g)
    return math.sqrt(max(float(np.dot(g, d)), 0.0)) / (2 * math.sqrt(max(Q, 1e-300)))


def _direction(problem, g, memory):
    """Two-loop L-BFGS recursion with the Sobolev preconditioner as initial metric."""
    qv = g.copy()
    alphas = []
    for s, y, rho in reversed(memory):
        a = rho * float(np.dot(s, qv))
        alphas.append(a)
        qv -= a * y
    r = problem.disc.precondition(qv)
    if memory:
        s, y, _ = memory[-1]
        r *= float(np.dot(s, y)) / float(np.dot(y, problem.disc.precondition(y)))
    for (s, y, rho), a in zip(memory, reversed(alphas)):
        b = rho * float(np.dot(y, r))
        r += (a - b) * s
    return -r


def _descend(problem, v0, max_iter, gtol, history=8):
    """Preconditioned L-BFGS with Armijo backtracking on the normalised quotient."""
    v = problem.project(v0)
    Q, g = problem.evaluate(v)
    memory = []
    it = stalls = 0
    converged = False
    for it in range(1, max_iter + 1):
        if _residual(problem, Q, g) <= gtol:
            converged = True
            break
        d = _direction(problem, g, memory)
        slope = float(np.dot(g, d))
        if slope >= 0:
            memory.clear()
            d = -problem.disc.precondition(g)
            slope = float(np.dot(g, d))
        alpha = 1.0
        accepted = False
        while alpha > 1e-14:
            w = problem.project(v + alpha * d)
            Qw, gw = problem.evaluate(w)
            if Qw <= Q + ARMIJO * alpha * slope:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            if memory:
                memory.clear()
                continue
            break
        s, y = w - v, gw - g
        sy = float(np.dot(s, y))
        if sy > 1e-300:
            memory.append((s, y, 1.0 / sy))
            if len(memory) > history:
                memory.pop(0)
        stalls = stalls + 1 if Q - Qw <= 1e-15 * Q else 0
        v, Q, g = w, Qw, gw
        if stalls >= 5:
            # the quotient no longer moves: accept if the residual is at roundoff level
            converged = _residual(problem, Q, g) <= STALL_GTOL
            break
    res = _residual(problem, Q, g)
    converged = converged or res <= gtol
    return v, Q, it, converged, res


def _smooth_random(disc, rng):
    v = rng.standard_normal(disc.size)
    for _ in range(2):
        v = disc.precondition(disc.M @ v)
    return v


def _multistart(problem, inits, max_iter, gtol):
    best = None
    for idx, v0 in enumerate(inits):
        out = _descend(problem, v0, max_iter, gtol)
        if best is None or out[1] < best[1][1] - 1e-14 * abs(out[1]):
            best = (idx, out)
    return best


# -- public operations ---------------------------------------------------------------


def _p_equals_one_line(disc, antiperiodic):
    """Exact minimum of ``int v'^2 / |v|_inf^2`` (or its Neumann analogue).

    For antiperiodic functions one node is pinned to 1 and the energy is
    minimised (the minimiser is piecewise linear and stays in ``[-1, 1]``).
    For the constrained Neumann problem the denominator is the squared
    half-oscillation; the endpoints are pinned to -1 and 1.
    """
    K = disc.K.tocsc()
    n = disc.size
    if antiperiodic:
        e = np.zeros(n)
        e[0] = 1.0
        x = spla.spsolve(K, e)
        v = x / x[0]
    else:
        free = np.arange(1, n - 1)
        Kff = K[free][:, free]
        rhs = -(K[free][:, [0]].toarray().ravel() * -1.0 + K[free][:, [n - 1]].toarray().ravel())
        v = np.empty(n)
        v[0], v[-1] = -1.0, 1.0
        v[free] = spla.spsolve(Kff.tocsc(), rhs)
    value = float(v @ (disc.K @ v))
    return v, value


def minimize_antiperiodic_quotient(p, T, mesh=512, seed=0, restarts=3, max_iter=4000, gtol=1e-8):
    """Minimise ``int v'^2 / |v|_{2p/(p-1)}^2`` over ``v(0) + v(T) = 0``.

    Meshes ``mesh/4, mesh/2, mesh`` are solved in turn (the coarse
    solution, prolonged, starts the next level) so the recorded trace is
    nonincreasing. The coarsest level starts from the first antiperiodic
    eigenfunction and ``restarts`` seeded random smooth fields.

    Returns
    -------
    MinimizationResult
        ``value`` approximates ``M_p`` (``4/T`` at ``p = 1``, ``pi^2/T^2`` at
        ``p = inf``).
    """
    if mesh < 64:
        raise ValueError("mesh must be >= 64")
    return _minimize_line(p, T, mesh, seed, restarts, max_iter, gtol, antiperiodic=True)


def _minimize_line(p, T, mesh, seed, restarts, max_iter, gtol, antiperiodic):
    p = float(p)
    if not p >= 1:
        raise ValueError("p must be >= 1")
    q = _q_of_p(p)
    levels = [mesh // 4, mesh // 2, mesh] if mesh // 4 >= 16 else [mesh]
    if math.isinf(q):
        disc = _P1Line(T, mesh, antiperiodic)
        v, value = _p_equals_one_line(disc, antiperiodic)
        return MinimizationResult(value, v, 0.0, [mesh], [value], 1, True, 0.0, disc.coords,
                                  {"p": p, "q": "inf", "method": "pinned energy minimisation",
                                   "boundary": "antiperiodic" if antiperiodic else "neumann"})
    constrained = not antiperiodic
    disc = _P1Line(T, levels[0], antiperiodic)
    problem = _Problem(disc, q, constrained)
    t = disc.coords
    rng = np.random.default_rng(seed)
    inits = [np.cos(math.pi * t / T)] + [_smooth_random(disc, rng) for _ in range(restarts)]
    coarse_tol = gtol if len(levels) == 1 else max(gtol, COARSE_GTOL)
    start_idx, (v, Q, its, conv, res) = _multistart(problem, inits, max_iter, coarse_tol)
    trace = [Q]
    total = its
    for lvl in levels[1:]:
        disc, v = disc.prolong(v)
        problem = _Problem(disc, q, constrained)
        v, Q, its, conv, res = _descend(problem, v, max_iter,
                                        gtol if lvl == levels[-1] else coarse_tol)
        trace.append(Q)
        total += its
    cres = _constraint_residual(disc, v, q) if constrained else 0.0
    return MinimizationResult(
        float(Q), v, cres, levels, trace, total, bool(conv), float(res), disc.coords,
        {"p": p, "q": q, "boundary": "antiperiodic" if antiperiodic else "neumann",
         "restarts": restarts, "seed": seed, "best_start": start_idx,
         "method": "Sobolev-preconditioned L-BFGS, Armijo backtracking"})


def minimize_neumann_constrained(p, domain, mesh=None, h=None, seed=0, restarts=3, max_iter=4000,
                                 gtol=1e-8):
    """Constrained Neumann quotient (the ``L^p`` Lyapunov constant ``beta_p``).

    Parameters
    ----------
    p : float
        ``p > N/2``; ``p = inf`` uses the linear constraint ``int v = 0``.
    domain : Interval, Rectangle or Disc
    mesh : int
        Number of elements for an interval.
    h : float
        Grid spacing for 2D domains (single grid, lumped quadrature).
    """
    p = float(p)
    N = domain.dim
    if not p > N / 2:
        raise ValueError(f"p must exceed N/2 = {N / 2}")
    if isinstance(domain, Interval):
        mesh = 512 if mesh is None else int(mesh)
        if mesh < 64:
            raise ValueError("mesh must be >= 64")
        return _minimize_line(p, domain.length, mesh, seed, restarts, max_iter, gtol,
                              antiperiodic=False)
    if h is None:
        raise ValueError("2D domains need a grid spacing h")
    q = _q_of_p(p)
    grid = build_grid(domain, float(h))
    disc = _LumpedGrid(grid)
    problem = _Problem(disc, q, True)
    v1 = spla.eigsh(grid.K.tocsc(), k=2, M=disc.M.tocsc(), sigma=-1.0, which="LM")[1][:, 1] \
        if grid.n > 200 else np.linalg.eigh(np.diag(1 / np.sqrt(disc.w)) @ grid.K.toarray()
                                            @ np.diag(1 / np.sqrt(disc.w)))[1][:, 1] / np.sqrt(disc.w)
    rng = np.random.default_rng(seed)
    inits = [v1] + [_smooth_random(disc, rng) for _ in range(restarts)]
    start_idx, (v, Q, its, conv, res) = _multistart(problem, inits, max_iter, gtol)
    cres = _constraint_residual(disc, v, q)
    return MinimizationResult(
        float(Q), v, cres, [grid.n], [Q], its, bool(conv), float(res), grid.coords,
        {"p": p, "q": q, "domain": domain.to_dict(), "h": float(h), "restarts": restarts,
         "seed": seed, "best_start": start_idx, "quadrature": "lumped nodal",
         "method": "Sobolev-preconditioned L-BFGS, Armijo backtracking"})


@lru_cache(maxsize=64)
def neumann_beta(domain, h, p):
    """Cached ``beta_p`` on a 2D grid (used by certificates and the resonant solver)."""
    return minimize_neumann_constrained(p, domain, h=h).value


def mixed_quotient_min(M, a, b, mesh=512, return_minimizer=False):
    """Minimum of ``(int u'^2 - M int u^2) / u(b)^2`` over ``u(a) = 0``.

    With ``u(b) = 1`` pinned, the piecewise-linear minimiser solves a
    linear system; the value approximates ``sqrt(M) cot(sqrt(M) (b - a))``.
    """
    L = b - a
    if not L > 0:
        raise ValueError("need a < b")
    if not 0 < M <= math.pi**2 / (4 * L**2) * (1 + 1e-12):
        raise ValueError("M must lie in (0, pi^2 / (4 (b - a)^2)]")
    disc = _P1Line(L, mesh, antiperiodic=False)
    A = (disc.K - M * disc.M).tocsc()
    n = disc.size
    free = np.arange(1, n - 1)
    v = np.zeros(n)
    v[-1] = 1.0
    rhs = -A[free][:, [n - 1]].toarray().ravel()
    v[free] = spla.spsolve(A[free][:, free].tocsc(), rhs)
    value = float(v @ (A @ v))
    if return_minimizer:
        return value, a + disc.coords, v
    return value


@dataclass(frozen=True)
class CotSumResult:
    value: float
    argmin: tuple
    brute_force_value: float | None
    brute_force_argmin: tuple | None


def cot_sum_min(r, S, grid_points=200):
    """Minimum of ``sum cot(z_i)`` over ``z_i in (0, pi/2]``, ``sum z_i = S``.

    The minimum is ``r cot(S / r)`` at the equal split. For ``r <= 3`` a
    brute-force grid search (``z_r`` eliminated by the constraint) is also
    reported.
    """
    r = int(r)
    if r < 1:
        raise ValueError("r must be >= 1")
    if not (0 < S <= r * math.pi / 2) or not r * math.pi > 2 * S - 1e-15:
        raise ValueError("infeasible: need 0 < S <= r pi / 2")
    value = r / math.tan(S / r)
    argmin = tuple([S / r] * r)
    bf, bfarg = None, None
    if r == 1:
        bf, bfarg = 1 / math.tan(S), (S,)
    elif r <= 3:
        zmax = min(math.pi / 2, S)
        z = np.linspace(zmax / grid_points, zmax, grid_points)
        grids = np.meshgrid(*([z] * (r - 1)), indexing="ij")
        last = S - sum(grids)
        ok = (last > 0) & (last <= math.pi / 2)
        F = sum(1 / np.tan(g) for g in grids) + np.where(ok, 1 / np.tan(np.where(ok, last, 1.0)), np.inf)
        idx = np.unravel_index(np.argmin(F), F.shape)
        bf = float(F[idx])
        bfarg = tuple(float(g[idx]) for g in grids) + (float(last[idx]),)
    return CotSumResult(value, argmin, bf, bfarg)


# -- PDE structure --------------------------------------------------------------------


@dataclass
class VanishingMember:
    k: int
    inner_radius: float
    l1_positive: float
    l1_exact: float
    integral: float
    residual: float
    coefficient: object = None

    def to_dict(self):
        return {"k": self.k, "inner_radius": self.inner_radius, "l1_positive": self.l1_positive,
                "l1_exact": self.l1_exact, "integral": self.integral, "residual": self.residual}


def _vanishing_profile(R, S):
    """Radial profile and coefficient of the k-th member (log-radial cosine)."""
    r_in = R * math.exp(-S)
    w = math.pi / S

    def u(r):
        r = np.asarray(r, dtype=float)
        th = w * (np.log(np.maximum(r, r_in) / R) + S)
        return np.cos(th)

    def a(r):
        r = np.asarray(r, dtype=float)
        return np.where(r > r_in, w**2 / np.maximum(r, r_in) ** 2, 0.0)

    def laplacian(r):
        """``u_rr + u_r / r`` from the derivatives in ``r``."""
        r = np.asarray(r, dtype=float)
        th = w * (np.log(np.maximum(r, r_in) / R) + S)
        ur = -np.sin(th) * w / r
        urr = -np.cos(th) * (w / r) ** 2 + np.sin(th) * w / r**2
        return np.where(r > r_in, urr + ur / r, 0.0)

    return r_in, u, a, laplacian


def beta1_vanishing_family(domain: Disc, k, h=None, base_length=1.0, panels=64):
    """k-th member of a family in the disc whose ``|a_k^+|_1`` tends to zero.

    In the variable ``s = ln(r / R)`` the radial profile is ``u = 1`` for
    ``s <= -S_k`` and ``u = cos(pi (s + S_k) / S_k)`` up to the rim, with
    ``S_k = k * base_length``. Then ``u_r(R) = 0``, ``u`` vanishes only where
    ``Delta u`` does, and ``a_k = -Delta u / u = (pi / S_k)^2 / r^2`` outside
    the core, so ``|a_k^+|_1 = 2 pi^3 / S_k``.

    The residual ``|Delta u + a u| / |u|`` is evaluated from the ``r``
    derivatives at Gauss points and, if ``h`` is given, at the grid nodes,
    where the sampled coefficient is also returned.
    """
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    if not isinstance(domain, Disc):
        raise TypeError("the vanishing family is built on a disc")
    R = domain.radius
    S = k * base_length
    r_in, u, a, lap = _vanishing_profile(R, S)
    # composite Gauss-Legendre in s (geometric panels in r)
    edges = np.linspace(math.log(r_in), math.log(R), panels + 1)
    x, wts = np.polynomial.legendre.leggauss(16)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * np.diff(edges)
    s = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    ws = (half[:, None] * wts[None, :]).ravel()
    r = np.exp(s)
    av = a(r)
    l1 = float(np.sum(ws * 2 * math.pi * r**2 * np.maximum(av, 0.0)))
    integral = float(np.sum(ws * 2 * math.pi * r**2 * av))
    pts = r
    coef = None
    if h is not None:
        from .coeffs import SpatialCoefficient2D

        grid = build_grid(domain, float(h))
        rn = np.hypot(grid.coords[:, 0], grid.coords[:, 1])
        coef = SpatialCoefficient2D(domain, float(h), a(rn))
        pts = np.concatenate([r, rn[rn > 0]])
    uv = u(pts)
    resid = float(np.abs(lap(pts) + a(pts) * uv).max() / np.abs(uv).max())
    return VanishingMember(int(k), r_in, l1, 2 * math.pi**3 / S, integral, resid, coef)


@dataclass(frozen=True)
class ScalingReport:
    domain: dict
    p: float
    r: float
    beta: float
    beta_scaled: float
    ratio: float
    expected: float
    passed: bool | None
    note: str = ""

    def to_dict(self):
        return dict(self.__dict__)


def scaling_law_check(domain, p, r, mesh=256, h=None, rtol=0.02):
    """Compare ``beta_p(r Omega) / beta_p(Omega)`` with ``r^(N/p - 2)``.

    The critical exponent ``p = N/2`` (scale invariance) is only recorded,
    not asserted.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    p = float(p)
    N = domain.dim
    expo = (N / p if not math.isinf(p) else 0.0) - 2
    expected = r**expo
    if p <= N / 2:
        return ScalingReport(domain.to_dict(), p, r, math.nan, math.nan, math.nan, expected, None,
                             "critical or subcritical exponent: expectation recorded only")
    scaled = domain.scaled(r)
    if isinstance(domain, Interval):
        b0 = minimize_neumann_constrained(p, domain, mesh=mesh).value
        b1 = minimize_neumann_constrained(p, scaled, mesh=mesh).value
    else:
        if h is None:
            raise ValueError("2D domains need a grid spacing h")
        if math.isinf(p):
            from .pde import neumann_lambda1

            b0, b1 = neumann_lambda1(domain, h), neumann_lambda1(scaled, h)
        else:
            b0 = minimize_neumann_constrained(p, domain, h=h).value
            b1 = minimize_neumann_constrained(p, scaled, h=h).value
    ratio = b1 / b0
    return ScalingReport(domain.to_dict(), p, r, b0, b1, ratio, expected,
                         bool(abs(ratio / expected - 1) <= rtol))

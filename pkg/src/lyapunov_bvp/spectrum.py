"""Periodic and antiperiodic spectra of Hill operators.

Scalar problems ``u'' + (lam + a) u = 0`` are solved through the
discriminant ``Delta(lam)`` (periodic eigenvalues solve ``Delta = 2``,
antiperiodic ones ``Delta = -2``); a finite-difference discretisation
serves as an independent oracle. The Krein eigenvalue of a matrix
coefficient, ``u'' + lam P(t) u = 0`` with antiperiodic conditions, is
computed from a symmetric-definite generalized eigenproblem.

Index conventions: periodic eigenvalues are numbered from 0, antiperiodic
ones from 1, and double eigenvalues appear twice.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import brentq

from . import _kernels
from .coeffs import Constant, MatrixCoefficient, ScalarCoefficient
from .errors import NoPositiveEigenvalue, ResolutionError
from .floquet import DEFAULT_STEPS, monodromy, scalar_discriminant, stage_values, step_mesh

__all__ = [
    "Boundary",
    "Eigenvalue",
    "SpectrumTable",
    "ZeroStructure",
    "InterlacingReport",
    "scalar_eigenvalues",
    "discretized_scalar_eigenvalues",
    "verify_interlacing",
    "krein_lambda1",
    "zero_structure",
    "free_eigenvalue",
]

DOUBLE_ROOT_TOL = 1e-8


class Boundary(str, enum.Enum):
    PERIODIC = "periodic"
    ANTIPERIODIC = "antiperiodic"

    @property
    def sign(self):
        return 1.0 if self is Boundary.PERIODIC else -1.0

    @property
    def first_index(self):
        return 0 if self is Boundary.PERIODIC else 1


@dataclass(frozen=True)
class Eigenvalue:
    index: int
    value: float
    multiplicity: int
    method: str


@dataclass(frozen=True)
class SpectrumTable:
    boundary: Boundary
    eigenvalues: tuple
    metadata: dict = field(default_factory=dict)

    @property
    def values(self):
        return np.array([e.value for e in self.eigenvalues])

    def __getitem__(self, index):
        """Eigenvalue by its mathematical index (0-based periodic, 1-based antiperiodic)."""
        return self.eigenvalues[index - self.boundary.first_index].value

    def to_dict(self):
        return {
            "boundary": self.boundary.value,
            "eigenvalues": [
                {"index": e.index, "value": e.value, "multiplicity": e.multiplicity, "method": e.method}
                for e in self.eigenvalues
            ],
            "metadata": self.metadata,
        }

    def csv_rows(self):
        return [(e.index, e.value, e.multiplicity) for e in self.eigenvalues]


def free_eigenvalue(boundary, index, T):
    """Eigenvalue of ``u'' + lam u = 0`` (``a = 0``) with the given index."""
    boundary = Boundary(boundary)
    if boundary is Boundary.PERIODIC:
        k = (index + 1) // 2
        return (2 * k * math.pi / T) ** 2
    k = (index + 1) // 2
    return ((2 * k - 1) * math.pi / T) ** 2


def _g(a, lams, sign, steps):
    d, dd, _ = scalar_discriminant(a, lams, steps)
    return sign * d - 2.0, sign * dd


def scalar_eigenvalues(a: ScalarCoefficient, boundary, count, steps=DEFAULT_STEPS):
    """First ``count`` periodic or antiperiodic eigenvalues from the discriminant.

    The scan starts at ``-sup a - (pi/T)^2`` (below the lowest eigenvalue)
    and ends past the free eigenvalue of the last requested index shifted
    by ``-inf a``. Sign changes of ``+-Delta - 2`` are refined with Brent's
    method; local maxima (found from the exact ``dDelta/dlam`` supplied by
    the variational equation) within ``1e-8`` of zero are double roots.

    Raises
    ------
    ResolutionError
        If fewer than ``count`` eigenvalues are found in the scan window.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    boundary = Boundary(boundary)
    sign = boundary.sign
    T = a.T
    unit = (math.pi / T) ** 2
    amin, amax = a.extrema()
    last = boundary.first_index + count - 1
    lo = -amax - unit
    hi = free_eigenvalue(boundary, last + 1 if last % 2 else last, T) - amin + 4 * unit
    step = unit / 8
    grid = np.arange(lo, hi + step, step)
    g, _ = _g(a, grid, sign, steps)

    # x8 refinement where |Delta| is close to 2
    delta = sign * (g + 2.0)
    near = np.maximum(np.abs(delta[:-1]), np.abs(delta[1:])) > 1.5
    if np.any(near):
        fine = [grid[:-1][~near]]
        for i in np.flatnonzero(near):
            fine.append(np.linspace(grid[i], grid[i + 1], 9)[:-1])
        grid = np.sort(np.concatenate(fine + [grid[-1:]]))
    g, dg = _g(a, grid, sign, steps)

    f = lambda x: float(_g(a, np.array([x]), sign, steps)[0][0])  # noqa: E731
    fprime = lambda x: float(_g(a, np.array([x]), sign, steps)[1][0])  # noqa: E731
    xtol = 1e-13 * max(1.0, abs(hi))

    g = np.where(g == 0.0, np.finfo(float).tiny, g)
    roots = []  # (value, multiplicity)
    for i in np.flatnonzero(np.sign(g[:-1]) != np.sign(g[1:])):
        roots.append((brentq(f, grid[i], grid[i + 1], xtol=xtol, rtol=1e-15), 1))

    # local maxima of g: tangencies (double roots) or narrow missed humps
    doubles = []
    for i in np.flatnonzero((dg[:-1] > 0) & (dg[1:] <= 0)):
        x0, x1 = grid[i], grid[i + 1]
        xm = brentq(fprime, x0, x1, xtol=xtol, rtol=1e-15) if dg[i + 1] < 0 else x1
        gm = f(xm)
        if abs(gm) <= DOUBLE_ROOT_TOL:
            if not doubles or xm - doubles[-1] > unit / 64:
                doubles.append(xm)
        elif gm > 0 and g[i] < 0 and g[i + 1] < 0:
            roots.append((brentq(f, x0, xm, xtol=xtol, rtol=1e-15), 1))
            roots.append((brentq(f, xm, x1, xtol=xtol, rtol=1e-15), 1))
    merge = unit / 64
    roots = [r for r in roots if all(abs(r[0] - d) > merge for d in doubles)]
    roots.extend((d, 2) for d in doubles)
    roots.sort()

    values = []
    for val, mult in roots:
        values.extend([(val, mult)] * mult)
    if len(values) < count:
        raise ResolutionError(
            f"found {len(values)} of {count} {boundary.value} eigenvalues in [{lo:.6g}, {hi:.6g}]",
            window=(lo, hi),
        )
    eig = tuple(
        Eigenvalue(boundary.first_index + i, float(v), m, "discriminant")
        for i, (v, m) in enumerate(values[:count])
    )
    meta = {
        "method": "discriminant",
        "steps": int(steps),
        "scan_window": [lo, hi],
        "scan_step": step,
        "refinement": 8,
        "double_root_tol": DOUBLE_ROOT_TOL,
    }
    return SpectrumTable(boundary, eig, meta)


def _fd_matrix(values, T, sign):
    N = values.size
    h = T / N
    L = np.zeros((N, N))
    idx = np.arange(N)
    L[idx, idx] = 2.0 / h**2 - values
    L[idx[:-1], idx[1:]] = -1.0 / h**2
    L[idx[1:], idx[:-1]] = -1.0 / h**2
    L[0, N - 1] = L[N - 1, 0] = -sign / h**2
    return L


def discretized_scalar_eigenvalues(a: ScalarCoefficient, boundary, mesh_size, count=None):
    """Eigenvalues of the central-difference matrix of ``-u'' - a u``.

    Nodes are ``t_i = i T / mesh_size``; the wrap entries carry the sign of
    the boundary condition (flipped for antiperiodic problems).
    """
    if mesh_size < 32:
        raise ValueError("mesh_size must be >= 32")
    boundary = Boundary(boundary)
    t = np.arange(mesh_size) * (a.T / mesh_size)
    L = _fd_matrix(np.asarray(a(t), dtype=float), a.T, boundary.sign)
    vals = sla.eigvalsh(L)
    if count is not None:
        vals = vals[:count]
    eig = tuple(
        Eigenvalue(boundary.first_index + i, float(v), 1, "discretized") for i, v in enumerate(vals)
    )
    return SpectrumTable(boundary, eig, {"method": "discretized", "mesh": int(mesh_size),
                                          "scheme": "second-order central differences"})


@dataclass(frozen=True)
class InterlacingReport:
    holds: bool
    chain: tuple  # ((label, value), ...)
    violation: tuple | None
    tol: float

    def to_dict(self):
        return {
            "holds": self.holds,
            "chain": [[lbl, v] for lbl, v in self.chain],
            "violation": list(self.violation) if self.violation else None,
            "tol": self.tol,
        }


def verify_interlacing(a: ScalarCoefficient, depth, steps=DEFAULT_STEPS, rtol=1e-8):
    """Check the chain ``l0 < m1 <= m2 < l1 <= l2 < m3 <= m4 < l3 <= ...``.

    ``l`` are periodic and ``m`` antiperiodic eigenvalues; the chain runs up
    to ``l_{2 depth}``. Non-strict links allow a violation of ``tol`` and
    strict links require a positive gap larger than ``tol``.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    per = scalar_eigenvalues(a, Boundary.PERIODIC, 2 * depth + 1, steps)
    anti = scalar_eigenvalues(a, Boundary.ANTIPERIODIC, 2 * depth, steps)
    chain = _alternate(per, anti, depth)
    tol = rtol * max(1.0, max(abs(v) for _, v in chain))
    violation = None
    for i in range(len(chain) - 1):
        (l0, v0), (l1, v1) = chain[i], chain[i + 1]
        is_strict = i % 2 == 0
        ok = (v1 - v0 > tol) if is_strict else (v1 - v0 >= -tol)
        if not ok:
            violation = (l0, v0, "<" if is_strict else "<=", l1, v1)
            break
    return InterlacingReport(violation is None, tuple(chain), violation, tol)


def _alternate(per, anti, depth):
    """l0, m1, m2, l1, l2, m3, m4, l3, l4, ... up to l_{2 depth}."""
    chain = [("lambda_0", per[0])]
    m = 1  # next antiperiodic index
    p = 1  # next periodic index
    while p <= 2 * depth:
        chain.append((f"anti_{m}", anti[m]))
        chain.append((f"anti_{m + 1}", anti[m + 1]))
        m += 2
        chain.append((f"lambda_{p}", per[p]))
        chain.append((f"lambda_{p + 1}", per[p + 1]))
        p += 2
        if m > 2 * depth:
            break
    return chain


def _block_mass(P: MatrixCoefficient, t):
    vals = P(t)  # (N, n, n)
    return sla.block_diag(*vals)


def krein_lambda1(P: MatrixCoefficient, mesh_size=512):
    """Smallest positive eigenvalue of ``-u'' = lam P(t) u`` with ``u(T) = -u(0)``.

    Discretised as ``K v = lam M_P v`` with the antiperiodic central-difference
    stiffness ``K`` (positive definite) and the block-diagonal pointwise mass
    ``M_P``. Since ``K`` is definite, the positive eigenvalues are the
    reciprocals of the positive eigenvalues ``mu`` of ``M_P v = mu K v``; the
    largest ``mu`` gives ``lambda_1``.

    Raises
    ------
    NoPositiveEigenvalue
        If ``M_P`` admits no positive direction relative to ``K``.
    """
    if mesh_size < 64:
        raise ValueError("mesh_size must be >= 64")
    if not isinstance(P, MatrixCoefficient):
        raise TypeError("P must be a MatrixCoefficient")
    n, T, N = P.n, P.T, int(mesh_size)
    t = np.arange(N) * (T / N)
    K1 = _fd_matrix(np.zeros(N), T, -1.0)
    K = np.kron(K1, np.eye(n))
    M = _block_mass(P, t)
    dim = N * n
    mu = sla.eigh(M, K, eigvals_only=True, subset_by_index=[dim - 1, dim - 1])[0]
    floor = 1e-12 * max(1.0, np.abs(M).max()) * (T / math.pi) ** 2
    if mu <= floor:
        raise NoPositiveEigenvalue(
            f"pencil has no positive eigenvalue (largest reciprocal {mu:.3e})")
    return float(1.0 / mu)


@dataclass(frozen=True)
class ZeroStructure:
    zeros_of_u: tuple
    zeros_of_du: tuple
    m: int
    interlaced: bool
    shift: float

    def to_dict(self):
        return {
            "zeros_of_u": list(self.zeros_of_u),
            "zeros_of_du": list(self.zeros_of_du),
            "m": self.m,
            "interlaced": self.interlaced,
            "shift": self.shift,
        }


def _hermite_zeros(t, y, dy, lo, hi):
    """Zeros of the piecewise cubic Hermite interpolant of (y, dy) inside (lo, hi)."""
    out = []
    for k in np.flatnonzero(np.sign(y[:-1]) * np.sign(y[1:]) < 0):
        t0, t1 = t[k], t[k + 1]
        h = t1 - t0
        y0, y1, d0, d1 = y[k], y[k + 1], dy[k] * h, dy[k + 1] * h

        def cubic(s, y0=y0, y1=y1, d0=d0, d1=d1):
            return ((2 * s**3 - 3 * s**2 + 1) * y0 + (s**3 - 2 * s**2 + s) * d0
                    + (-2 * s**3 + 3 * s**2) * y1 + (s**3 - s**2) * d1)

        z = t0 + h * brentq(cubic, 0.0, 1.0, xtol=1e-15)
        if lo < z < hi:
            out.append(float(z))
    return out


def zero_structure(a: ScalarCoefficient, boundary, steps=DEFAULT_STEPS, tol=1e-6):
    """Zeros of an eigenfunction for the eigenvalue 0 and the count ``m``.

    The eigenfunction is the solution whose initial data span the kernel of
    ``M -+ I`` (any solution when ``M = +-I``). Time is shifted so that the
    solution vanishes at the start; ``m`` is the number of zeros of ``u``
    in a half-open period. Zeros of ``u`` and ``u'`` are located by cubic
    Hermite interpolation between RK4 nodes and Brent refinement.
    """
    boundary = Boundary(boundary)
    sign = boundary.sign
    T = a.T
    mono = monodromy(a, steps, error_estimate=False)
    M = np.asarray(mono.matrix)
    if abs(sign * mono.discriminant - 2.0) > tol:
        raise ValueError(
            f"0 is not a {boundary.value} eigenvalue: discriminant {mono.discriminant:.9g}")
    B = M - sign * np.eye(2)
    if np.abs(B).max() <= tol * max(1.0, np.abs(M).max()):
        x0 = np.array([0.0, 1.0])
    else:
        _, _, vh = np.linalg.svd(B)
        x0 = vh[-1]

    # first zero of the eigenfunction on [0, T)
    fine = max(int(steps), 1024)
    a0, am, a1, hs = stage_values(a, fine)
    tr = _kernels.scalar_trajectory(a0, am, a1, hs, float(x0[0]), float(x0[1]))
    tt = np.concatenate([[0.0], np.cumsum(hs)])
    u, du = tr[:, 0], tr[:, 1]
    if abs(u[0]) <= 1e-14 * np.abs(u).max():
        t_star = 0.0
    else:
        ddu = -np.concatenate([a0, a1[-1:]]) * u
        zs = _hermite_zeros(tt, u, du, 0.0, T)
        if not zs:
            return ZeroStructure((), tuple(_hermite_zeros(tt, du, ddu, 0.0, T)), 0, True, 0.0)
        t_star = zs[0]

    a0, am, a1, hs = _shifted_stages(a, fine, t_star)
    tr = _kernels.scalar_trajectory(a0, am, a1, hs, 0.0, 1.0)
    tt = np.concatenate([[0.0], np.cumsum(hs)])
    u, du = tr[:, 0], tr[:, 1]
    ddu = -np.concatenate([a0, a1[-1:]]) * u
    edge = 1e-6 * T
    zu = [0.0] + _hermite_zeros(tt, u, du, edge, T - edge)
    zdu = _hermite_zeros(tt, du, ddu, 0.0, T)
    # strict interlacing: exactly one zero of u' between consecutive zeros of u
    bounds = zu + [T]
    interlaced = all(
        sum(1 for z in zdu if lo < z < hi) == 1 for lo, hi in zip(bounds[:-1], bounds[1:])
    )
    return ZeroStructure(tuple(zu), tuple(zdu), len(zu), bool(interlaced), float(t_star))


def _shifted_stages(a, steps, t0):
    starts, hs = step_mesh(a.breakpoints, a.T, steps, t0)
    ends = starts + hs
    a0 = np.asarray(a.eval_side(starts, +1), dtype=float)
    am = np.asarray(a(starts + 0.5 * hs), dtype=float)
    a1 = np.asarray(a.eval_side(ends, -1), dtype=float)
    return a0, am, a1, hs


def shifted_constant_spectrum(c: Constant, boundary, count):
    """Closed-form spectrum of a constant coefficient (oracle helper)."""
    boundary = Boundary(boundary)
    return np.array([free_eigenvalue(boundary, boundary.first_index + i, c.T) - c.c
                     for i in range(count)])

"""Discrete Neumann Laplacian on intervals, rectangles and discs.

The operator is the finite-volume pair ``(K, W)`` from :mod:`grids`:
``-Delta u`` is approximated by ``W^{-1} K u`` with ``K`` symmetric and
``K 1 = 0``. Eigenproblems are posed as ``K u = lam W u``; the symmetric
form ``W^{-1/2} K W^{-1/2}`` is used for singular-value tests.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .coeffs import SpatialCoefficient2D
from .errors import NearSingular
from .grids import Disc, Grid, Interval, Rectangle, build_grid

__all__ = [
    "DiscreteNeumannOperator",
    "Nontriviality",
    "NontrivialityResult",
    "neumann_operator",
    "neumann_lambda1",
    "detect_nontrivial",
    "solve_linear_neumann",
    "mean_nonnegativity_counterexample",
    "field_from_function",
    "lp_norm_field",
]

DiscreteNeumannOperator = Grid
DENSE_LIMIT = 2500


def neumann_operator(domain, h) -> Grid:
    """Assembled discrete Neumann operator (cached per domain and spacing)."""
    return build_grid(domain, float(h))


def _check_resolution(grid):
    meta = grid.metadata
    dom = grid.domain
    if isinstance(dom, Interval):
        ok = meta["cells"] >= 32
    elif isinstance(dom, Rectangle):
        ok = min(meta["cells"]) >= 32
    else:
        ok = meta["rings"] >= 16
    if not ok:
        raise ValueError("grid too coarse: need at least 32 nodes per side (16 rings on a disc)")


def field_from_function(domain, h, func):
    """Sample ``func(x)`` (1D) or ``func(x, y)`` (2D) at the grid nodes."""
    grid = neumann_operator(domain, h)
    if domain.dim == 1:
        vals = func(grid.coords[:, 0])
    else:
        vals = func(grid.coords[:, 0], grid.coords[:, 1])
    vals = np.broadcast_to(np.asarray(vals, dtype=float), (grid.n,) + np.shape(vals)[1:])
    return SpatialCoefficient2D(domain, float(h), np.array(vals))


def lp_norm_field(grid, values, p, positive_part=True):
    """Discrete ``L^p`` norm with the lumped control-volume weights."""
    v = np.maximum(values, 0.0) if positive_part else np.abs(values)
    if math.isinf(p):
        return float(v.max())
    return float(np.dot(grid.weights, v**p) ** (1.0 / p))


def neumann_lambda1(domain, h):
    """First nonzero eigenvalue of the discrete Neumann Laplacian.

    Shift-invert Lanczos about ``-1`` returns the two eigenvalues closest
    to the bottom of the spectrum: the constant mode (zero) and the one
    sought. Small problems use a dense symmetric solve.
    """
    grid = neumann_operator(domain, h)
    _check_resolution(grid)
    return float(_lowest_pencil(grid, 2)[1])


def _lowest_pencil(grid, k):
    if grid.n <= DENSE_LIMIT:
        vals = sla.eigh(grid.K.toarray(), np.diag(grid.weights), eigvals_only=True,
                        subset_by_index=[0, k - 1])
        return np.sort(vals)
    vals = spla.eigsh(grid.K.tocsc(), k=k, M=sp.diags(grid.weights).tocsc(), sigma=-1.0,
                      which="LM", return_eigenvectors=False)
    return np.sort(vals)


class Nontriviality(str, enum.Enum):
    NONTRIVIAL = "nontrivial"
    ONLY_TRIVIAL = "only_trivial"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class NontrivialityResult:
    verdict: Nontriviality
    sigma_min: float
    scale: float
    tol: float

    def to_dict(self):
        return {"verdict": self.verdict.value, "sigma_min": self.sigma_min,
                "scale": self.scale, "tol": self.tol}


def _field_values(a, grid):
    if isinstance(a, SpatialCoefficient2D):
        if a.domain != grid.domain or not math.isclose(a.h, grid.h):
            raise ValueError("coefficient grid does not match the operator grid")
        return np.asarray(a.values)
    if np.isscalar(a):
        return np.full(grid.n, float(a))
    vals = np.asarray(a, dtype=float)
    if vals.shape[0] != grid.n:
        raise ValueError(f"expected {grid.n} node values, got shape {vals.shape}")
    return vals


def _system_operator(grid, vals, symmetric):
    """Sparse ``K - W a`` (or its symmetric scaling) for scalar or matrix ``a``."""
    n = 1 if vals.ndim == 1 else vals.shape[1]
    if symmetric:
        s = 1.0 / np.sqrt(grid.weights)
        base = sp.diags(s) @ grid.K @ sp.diags(s)
        mass = np.ones(grid.n)
    else:
        base = grid.K
        mass = grid.weights
    if n == 1:
        return (base - sp.diags(mass * vals)).tocsc(), 1
    blocks = sp.block_diag([mass[i] * vals[i] for i in range(grid.n)])
    return (sp.kron(base, sp.identity(n)) - blocks).tocsc(), n


def detect_nontrivial(domain, a, h, tol=1e-6):
    """Three-way test for nontrivial Neumann solutions of ``Delta u + a u = 0``.

    Parameters
    ----------
    domain : Interval, Rectangle or Disc
    a : SpatialCoefficient2D, array of node values (``(nodes,)`` or
        ``(nodes, n, n)``) or a scalar constant
    h : float
        Grid spacing.
    tol : float
        Relative threshold; ``sigma_min`` is compared with ``tol * scale``
        where ``scale`` is the Gershgorin bound of the symmetric operator.
    """
    grid = neumann_operator(domain, h)
    vals = _field_values(a, grid)
    S, n = _system_operator(grid, vals, symmetric=True)
    scale = float(abs(S).sum(axis=1).max())
    if S.shape[0] <= DENSE_LIMIT:
        ev = sla.eigvalsh(S.toarray())
        sigma = float(np.abs(ev).min())
    else:
        shift = -0.37 * tol * scale
        ev = spla.eigsh(S, k=3, sigma=shift, which="LM", return_eigenvectors=False)
        sigma = float(np.abs(ev).min())
    if sigma < tol * scale:
        verdict = Nontriviality.NONTRIVIAL
    elif sigma > 10 * tol * scale:
        verdict = Nontriviality.ONLY_TRIVIAL
    else:
        verdict = Nontriviality.INCONCLUSIVE
    return NontrivialityResult(verdict, sigma, scale, tol)


def solve_linear_neumann(domain, a, g, h, check=True, tol=1e-6):
    """Solve ``Delta u + a u = g`` with Neumann conditions.

    Equivalently ``(-Delta - a) u = -g``; for example ``a = -1, g = 1``
    gives ``u = -1``.
    A sparse LU factorisation is used, followed by one step of iterative
    refinement; the relative residual is required to be below ``1e-10``.

    Raises
    ------
    NearSingular
        If ``check`` is set and ``sigma_min`` is below the nontriviality
        threshold, or if the factorisation or residual test fails. An
        inconclusive ``sigma_min`` is accepted: the residual test decides.
    """
    grid = neumann_operator(domain, h)
    vals = _field_values(a, grid)
    gv = np.asarray(g.values if isinstance(g, SpatialCoefficient2D) else g, dtype=float)
    if check:
        res = detect_nontrivial(domain, vals, h, tol)
        if res.verdict is Nontriviality.NONTRIVIAL:
            raise NearSingular(
                f"operator is near singular (sigma_min {res.sigma_min:.3e}, "
                f"scale {res.scale:.3e})", sigma_min=res.sigma_min)
    A, n = _system_operator(grid, vals, symmetric=False)
    rhs = -(grid.weights[:, None] * gv.reshape(grid.n, n)).ravel()
    u = _factor_solve(A, rhs)
    return u.reshape(gv.shape)


def _factor_solve(A, rhs):
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:
        raise NearSingular(f"factorisation failed: {exc}") from exc
    u = lu.solve(rhs)
    r = rhs - A @ u
    u += lu.solve(r)
    r = rhs - A @ u
    denom = max(np.abs(rhs).max(), 1e-300)
    if not np.all(np.isfinite(u)) or np.abs(r).max() > 1e-10 * max(denom, np.abs(A @ u).max()):
        raise NearSingular("linear solve did not reach the residual target")
    return u


def default_profile(domain, h):
    """Smooth nonconstant field with zero normal derivative on the boundary."""
    if isinstance(domain, Interval):
        return field_from_function(domain, h, lambda x: np.cos(math.pi * x / domain.length))
    if isinstance(domain, Rectangle):
        return field_from_function(domain, h, lambda x, y: np.cos(math.pi * x / domain.a_len))
    R = domain.radius
    return field_from_function(domain, h, lambda x, y: (x**2 + y**2) / R**2
                               * (1 - 0.5 * (x**2 + y**2) / R**2))


@dataclass(frozen=True)
class CounterexampleResult:
    shift: float
    coefficient: np.ndarray
    integral: float
    norms: dict  # p -> ||a_n||_p
    residual: float

    def to_dict(self):
        return {"shift": self.shift, "integral": self.integral,
                "norms": {str(k): v for k, v in self.norms.items()}, "residual": self.residual}


def mean_nonnegativity_counterexample(domain, n, h, u0=None, p_grid=(1.0, 2.0, math.inf)):
    """Coefficient ``a_n = -Delta u0 / (u0 + n)`` with negative integral.

    ``u0 + n`` is a positive nontrivial Neumann solution for ``a_n``, while
    ``int a_n < 0`` and every norm of ``a_n`` tends to zero as ``n`` grows.
    """
    grid = neumann_operator(domain, h)
    base = default_profile(domain, h) if u0 is None else u0
    u = np.asarray(base.values if isinstance(base, SpatialCoefficient2D) else base, dtype=float)
    w = u + n
    if not np.all(w > 0):
        raise ValueError("shift too small: u0 + n must be positive")
    lap = grid.laplacian(u)
    a = -lap / w
    residual = float(np.abs(grid.laplacian(w) + a * w).max() / np.abs(w).max())
    norms = {p: lp_norm_field(grid, a, p, positive_part=False) for p in p_grid}
    return CounterexampleResult(float(n), a, grid.integrate(a), norms, residual)

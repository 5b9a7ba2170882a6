"""Monodromy matrices, characteristic multipliers and stability classes.

The second-order system ``u'' + A(t) u = 0`` is integrated as a first-order
system in ``(u, u')`` with the classical fixed-step RK4 scheme. Steps are
distributed over the smooth pieces between breakpoints of the coefficient.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels
from .coeffs import Fourier, MatrixCoefficient, ScalarCoefficient
from .errors import IntegrationError, NumericalError

__all__ = [
    "MonodromyResult",
    "StabilityClass",
    "StabilityVerdict",
    "SweepResult",
    "MathieuTemplate",
    "monodromy",
    "classify",
    "sweep",
    "step_mesh",
    "stage_values",
    "measured_order",
    "DEFAULT_STEPS",
    "DEFAULT_TOL",
]

DEFAULT_STEPS = 4096
DEFAULT_TOL = 1e-7


def step_mesh(breakpoints, T, steps, t0=0.0):
    """Step sizes over ``[t0, t0 + T]`` with every breakpoint on a step boundary."""
    bp = np.asarray(breakpoints, dtype=float)
    inner = []
    for b in bp:
        s = t0 + ((b - t0) % T)
        if t0 < s < t0 + T and not math.isclose(s, t0 + T, rel_tol=0, abs_tol=1e-14 * T):
            inner.append(s)
    edges = np.unique(np.concatenate([[t0], np.sort(inner), [t0 + T]]))
    lengths = np.diff(edges)
    counts = np.maximum(1, np.round(steps * lengths / T).astype(int))
    hs = np.repeat(lengths / counts, counts)
    starts = np.repeat(edges[:-1], counts) + np.concatenate(
        [np.arange(c) * (L / c) for c, L in zip(counts, lengths)]
    )
    return starts, hs


@lru_cache(maxsize=256)
def stage_values(coef, steps, t0=0.0):
    """Cached (a(t_k+), a(t_k + h/2), a(t_{k+1}-), h_k) for RK4 on one period."""
    starts, hs = step_mesh(coef.breakpoints, coef.T, steps, t0)
    ends = starts + hs
    a0 = np.asarray(coef.eval_side(starts, +1), dtype=float)
    am = np.asarray(coef(starts + 0.5 * hs), dtype=float)
    a1 = np.asarray(coef.eval_side(ends, -1), dtype=float)
    if not (np.all(np.isfinite(a0)) and np.all(np.isfinite(am)) and np.all(np.isfinite(a1))):
        raise IntegrationError("coefficient produced non-finite values")
    for arr in (a0, am, a1, hs):
        arr.setflags(write=False)
    return a0, am, a1, hs


def scalar_discriminant(a, lams, steps=DEFAULT_STEPS):
    """Discriminant and its derivative for ``u'' + (lam + a) u = 0`` at each ``lam``."""
    a0, am, a1, hs = stage_values(a, int(steps))
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    phi, dphi = _kernels.scalar_transfer(a0, am, a1, hs, lams)
    delta = phi[:, 0, 0] + phi[:, 1, 1]
    ddelta = dphi[:, 0, 0] + dphi[:, 1, 1]
    if not np.all(np.isfinite(delta)):
        raise IntegrationError("integration overflowed")
    return delta, ddelta, phi


@dataclass(frozen=True)
class MonodromyResult:
    n: int
    matrix: np.ndarray
    multipliers: np.ndarray
    discriminant: float | None
    step_count: int
    estimated_error: float
    shift: float = 0.0

    @property
    def det(self):
        return float(np.linalg.det(self.matrix))

    def to_dict(self):
        return {
            "n": self.n,
            "matrix": self.matrix.tolist(),
            "multipliers": [[float(m.real), float(m.imag)] for m in self.multipliers],
            "discriminant": self.discriminant,
            "det": self.det,
            "step_count": self.step_count,
            "estimated_error": self.estimated_error,
        }


def _raw_matrix(A, steps, shift):
    if isinstance(A, ScalarCoefficient):
        a0, am, a1, hs = stage_values(A, int(steps))
        phi, _ = _kernels.scalar_transfer(a0, am, a1, hs, np.array([float(shift)]))
        return phi[0], hs.size
    if isinstance(A, MatrixCoefficient):
        starts, hs = step_mesh(A.breakpoints, A.T, int(steps))
        A0 = A.eval_side(starts, +1)
        Am = A(starts + 0.5 * hs)
        A1 = A.eval_side(starts + hs, -1)
        if shift:
            eye = np.eye(A.n) * shift
            A0, Am, A1 = A0 + eye, Am + eye, A1 + eye
        if not (np.all(np.isfinite(A0)) and np.all(np.isfinite(Am)) and np.all(np.isfinite(A1))):
            raise IntegrationError("coefficient produced non-finite values")
        M = _kernels.matrix_transfer(np.ascontiguousarray(A0), np.ascontiguousarray(Am),
                                     np.ascontiguousarray(A1), hs)
        return M, hs.size
    raise TypeError(f"expected a scalar or matrix coefficient, got {type(A).__name__}")


def monodromy(A, steps=DEFAULT_STEPS, shift=0.0, error_estimate=True):
    """Fundamental matrix at ``t = T`` of ``u'' + (A(t) + shift) u = 0``.

    Parameters
    ----------
    A : ScalarCoefficient or MatrixCoefficient
    steps : int
        Approximate number of RK4 steps per period (at least 64).
    shift : float
        Spectral parameter added to the coefficient (times the identity).
    error_estimate : bool
        If set, the run is repeated with half the steps and the Richardson
        estimate ``|M_N - M_{N/2}| / 15`` is reported.

    Returns
    -------
    MonodromyResult
    """
    if steps < 64:
        raise ValueError("steps must be >= 64")
    M, count = _raw_matrix(A, steps, shift)
    if not np.all(np.isfinite(M)):
        raise IntegrationError("integration overflowed")
    err = float("nan")
    if error_estimate:
        Mh, _ = _raw_matrix(A, steps // 2, shift)
        err = float(np.max(np.abs(M - Mh)) / 15.0)
    n = M.shape[0] // 2
    mult = np.linalg.eigvals(M)
    mult = mult[np.lexsort((mult.imag, mult.real))]
    disc = float(np.trace(M)) if n == 1 else None
    M.setflags(write=False)
    return MonodromyResult(n, M, mult, disc, int(count), err, float(shift))


class StabilityClass(str, enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    BOUNDARY = "Boundary"


@dataclass(frozen=True)
class StabilityVerdict:
    cls: StabilityClass
    detail: dict
    tol: float

    @property
    def coexistence(self):
        """True at Boundary when the multiplier(s) of modulus one are semisimple."""
        return self.cls is StabilityClass.BOUNDARY and bool(self.detail.get("semisimple"))

    def to_dict(self):
        return {"class": self.cls.value, "detail": self.detail, "tol": self.tol}


def _semisimple(M, mult, tol, cluster_tol=1e-4):
    """Geometric == algebraic multiplicity for each cluster of multipliers."""
    scale = np.linalg.norm(M, 2)
    dim = M.shape[0]
    seen = np.zeros(len(mult), dtype=bool)
    for i, mu in enumerate(mult):
        if seen[i]:
            continue
        group = np.abs(mult - mu) <= cluster_tol * max(1.0, abs(mu))
        seen |= group
        alg = int(group.sum())
        if alg == 1:
            continue
        centre = mult[group].mean()
        s = np.linalg.svd(M - centre * np.eye(dim), compute_uv=False)
        geo = int(np.sum(s <= tol * scale * 10 + np.abs(mult[group] - centre).max() * 10))
        if geo < alg:
            return False
    return True


def classify(m: MonodromyResult, tol=DEFAULT_TOL):
    """Stable / Unstable / Boundary classification of a monodromy result.

    For ``n = 1`` the rule is on ``|trace|`` versus ``2 -+ tol``. At the
    scalar boundary the detail also records whether ``M = +-I`` within
    ``tol * |M|`` (coexistence). For systems every multiplier must lie in
    the band ``[1 - tol, 1 + tol]`` in modulus and be semisimple.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    M = np.asarray(m.matrix)
    if m.n == 1:
        d = m.discriminant
        detail = {"discriminant": d}
        if abs(d) < 2 - tol:
            cls = StabilityClass.STABLE
        elif abs(d) > 2 + tol:
            cls = StabilityClass.UNSTABLE
        else:
            cls = StabilityClass.BOUNDARY
            sgn = 1.0 if d > 0 else -1.0
            resid = float(np.max(np.abs(M - sgn * np.eye(2))))
            detail["semisimple"] = bool(resid <= max(tol, 1e-6) * np.abs(M).max())
            detail["distance_to_pm_identity"] = resid
        return StabilityVerdict(cls, detail, tol)

    mods = np.abs(m.multipliers)
    dev = float(np.max(np.abs(mods - 1.0)))
    detail = {"max_modulus_deviation": dev, "rank_threshold": tol * float(np.linalg.norm(M, 2))}
    if np.any(mods > 1 + tol):
        cls = StabilityClass.UNSTABLE
    else:
        ss = _semisimple(M, m.multipliers, tol)
        detail["semisimple"] = bool(ss)
        cls = StabilityClass.STABLE if (dev <= tol and ss) else StabilityClass.BOUNDARY
    return StabilityVerdict(cls, detail, tol)


@dataclass(frozen=True)
class MathieuTemplate:
    """``a(t; alpha, beta) = alpha + beta cos(2 pi t / T)``."""

    T: float

    def __call__(self, alpha, beta):
        return Fourier(alpha, ((beta, 0.0),), self.T)


@dataclass
class SweepResult:
    alphas: np.ndarray
    betas: np.ndarray
    verdicts: list  # verdicts[i][j] for (alphas[i], betas[j]); None where a cell failed
    errors: dict = field(default_factory=dict)  # (i, j) -> message

    def class_grid(self):
        """Integer grid: 0 stable, 1 boundary, 2 unstable, -1 failed."""
        code = {StabilityClass.STABLE: 0, StabilityClass.BOUNDARY: 1, StabilityClass.UNSTABLE: 2}
        out = np.full((len(self.alphas), len(self.betas)), -1, dtype=int)
        for i, row in enumerate(self.verdicts):
            for j, v in enumerate(row):
                if v is not None:
                    out[i, j] = code[v.cls]
        return out

    def rows(self):
        """(alpha, beta, class, detail) in row-major order (alpha outer)."""
        for i, a in enumerate(self.alphas):
            for j, b in enumerate(self.betas):
                v = self.verdicts[i][j]
                if v is None:
                    yield float(a), float(b), "Error", self.errors[(i, j)]
                else:
                    d = v.detail.get("discriminant")
                    yield float(a), float(b), v.cls.value, d if d is not None else v.detail.get(
                        "max_modulus_deviation")


def _sweep_cell(args):
    template, alpha, beta, steps, tol = args
    try:
        return classify(monodromy(template(alpha, beta), steps, error_estimate=False), tol), None
    except (NumericalError, ValueError) as exc:
        return None, str(exc)


def sweep(template, alpha_grid, beta_grid, steps=DEFAULT_STEPS, tol=DEFAULT_TOL, workers=1):
    """Classify every cell of an (alpha, beta) parameter grid.

    Cells are independent; failures are recorded per cell without aborting.
    The output order does not depend on ``workers``.
    """
    alphas = np.asarray(alpha_grid, dtype=float)
    betas = np.asarray(beta_grid, dtype=float)
    if alphas.size == 0 or betas.size == 0:
        raise ValueError("parameter grids must be nonempty")
    jobs = [(template, a, b, steps, tol) for a in alphas for b in betas]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_cell, jobs))
    else:
        results = [_sweep_cell(j) for j in jobs]
    verdicts, errors = [], {}
    nb = betas.size
    for i in range(alphas.size):
        row = []
        for j in range(nb):
            v, err = results[i * nb + j]
            row.append(v)
            if err is not None:
                errors[(i, j)] = err
        verdicts.append(row)
    return SweepResult(alphas, betas, verdicts, errors)


def measured_order(A, base_steps=64, levels=3):
    """Observed convergence exponent of the monodromy matrix under step doubling.

    Errors are taken against a reference run with ``2**(levels + 2)`` times
    the base step count; the mean of the successive log2 error ratios is
    returned together with the errors.
    """
    ref, _ = _raw_matrix(A, base_steps * 2 ** (levels + 2), 0.0)
    errs = []
    for k in range(levels):
        M, _ = _raw_matrix(A, base_steps * 2**k, 0.0)
        errs.append(float(np.max(np.abs(M - ref))))
    errs = np.asarray(errs)
    orders = np.log2(errs[:-1] / errs[1:])
    return float(np.mean(orders)), errs

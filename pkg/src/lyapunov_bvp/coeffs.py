"""Periodic scalar and matrix coefficients, and sampled 2D spatial fields.

Four scalar representations are supported: :class:`Constant`,
:class:`Fourier`, :class:`PiecewiseConstant` and :class:`SampledGrid`.
All are immutable and hashable so that derived data (integration stage
values, norms) can be cached.

Fourier convention::

    a(t) = a0 + sum_k  a_k cos(2 pi k t / T) + b_k sin(2 pi k t / T)

``SampledGrid`` stores ``M`` values at ``t_i = i T / M`` (``i < M``); the
value at ``T`` is identified with ``v_0`` and the function is the periodic
piecewise-linear interpolant.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .grids import Disc, Interval, Rectangle, node_count

__all__ = [
    "ScalarCoefficient",
    "Constant",
    "Fourier",
    "PiecewiseConstant",
    "SampledGrid",
    "MatrixCoefficient",
    "SpatialCoefficient2D",
    "PrecVerdict",
    "eval",
    "lp_norm",
    "check_prec",
    "mean",
    "extrema",
    "rescale_period",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


class ScalarCoefficient:
    """Common interface of the T-periodic scalar representations."""

    T: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self._eval(np.mod(t, self.T))

    def eval_side(self, t, side):
        """Value at ``t`` taking the one-sided limit ``side`` (+1 right, -1 left).

        Only piecewise-constant coefficients distinguish the two sides.
        """
        return self(t)

    @property
    def breakpoints(self):
        """Points of ``[0, T]`` where the coefficient may fail to be smooth."""
        return (0.0, self.T)

    @property
    def is_exact_extremal(self):
        """True when :meth:`extrema` is exact (no sampling involved)."""
        return True

    def extrema(self, lo=0.0, hi=None):
        raise NotImplementedError

    def integral(self):
        raise NotImplementedError

    def abs_pow_integral(self, p, positive_part):
        raise NotImplementedError

    def affine(self, scale=1.0, offset=0.0):
        """Return ``scale * a + offset`` in the same representation."""
        raise NotImplementedError

    def with_period(self, T_new, scale=1.0):
        """Return ``scale * a(t T / T_new)``: same shape, new period."""
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError

    def _eval(self, t):
        raise NotImplementedError


def _check_period(T):
    if not (np.isfinite(T) and T > 0):
        raise ValueError(f"period must be positive and finite, got {T!r}")


@dataclass(frozen=True)
class Constant(ScalarCoefficient):
    c: float
    T: float

    def __post_init__(self):
        _check_period(self.T)
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "T", float(self.T))

    def _eval(self, t):
        return np.full_like(t, self.c, dtype=float)

    def extrema(self, lo=0.0, hi=None):
        return self.c, self.c

    def integral(self):
        return self.c * self.T

    def abs_pow_integral(self, p, positive_part):
        v = max(self.c, 0.0) if positive_part else abs(self.c)
        return v**p * self.T

    def affine(self, scale=1.0, offset=0.0):
        return Constant(scale * self.c + offset, self.T)

    def with_period(self, T_new, scale=1.0):
        return Constant(scale * self.c, T_new)

    def to_dict(self):
        return {"T": self.T, "kind": "constant", "value": self.c}


@dataclass(frozen=True)
class Fourier(ScalarCoefficient):
    a0: float
    terms: tuple  # ((a_k, b_k), ...) for k = 1..K
    T: float

    def __post_init__(self):
        _check_period(self.T)
        terms = tuple((float(a), float(b)) for a, b in self.terms)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "a0", float(self.a0))
        object.__setattr__(self, "T", float(self.T))

    @cached_property
    def _arrays(self):
        k = np.arange(1, len(self.terms) + 1, dtype=float)
        ab = np.array(self.terms, dtype=float).reshape(-1, 2)
        return k * (2.0 * np.pi / self.T), ab[:, 0], ab[:, 1]

    def _eval(self, t):
        w, a, b = self._arrays
        if w.size == 0:
            return np.full_like(t, self.a0, dtype=float)
        ph = np.multiply.outer(t, w)
        return self.a0 + np.cos(ph) @ a + np.sin(ph) @ b

    def derivative(self, t):
        w, a, b = self._arrays
        t = np.asarray(t, dtype=float)
        if w.size == 0:
            return np.zeros_like(t)
        ph = np.multiply.outer(t, w)
        return -np.sin(ph) @ (a * w) + np.cos(ph) @ (b * w)

    @property
    def is_exact_extremal(self):
        return not self.terms

    def extrema(self, lo=0.0, hi=None):
        hi = self.T if hi is None else hi
        if not self.terms:
            return self.a0, self.a0
        return _refined_extrema(self, lo, hi, 64 * len(self.terms) + 256)

    def integral(self):
        return self.a0 * self.T

    def abs_pow_integral(self, p, positive_part):
        return _gl_abs_pow(self, p, positive_part, max(64, 16 * len(self.terms)))

    def affine(self, scale=1.0, offset=0.0):
        terms = tuple((scale * a, scale * b) for a, b in self.terms)
        return Fourier(scale * self.a0 + offset, terms, self.T)

    def with_period(self, T_new, scale=1.0):
        return Fourier(self.a0, self.terms, T_new).affine(scale)

    def to_dict(self):
        return {
            "T": self.T,
            "kind": "fourier",
            "a0": self.a0,
            "cos": [a for a, _ in self.terms],
            "sin": [b for _, b in self.terms],
        }


@dataclass(frozen=True)
class PiecewiseConstant(ScalarCoefficient):
    breaks: tuple  # 0 = b_0 < b_1 < ... < b_m = T
    values: tuple  # m values
    T: float = field(default=None)

    def __post_init__(self):
        breaks = tuple(float(b) for b in self.breaks)
        values = tuple(float(v) for v in self.values)
        T = breaks[-1] if self.T is None else float(self.T)
        _check_period(T)
        if len(breaks) != len(values) + 1 or len(values) < 1:
            raise ValueError("need len(breaks) == len(values) + 1 >= 2")
        if breaks[0] != 0.0 or not math.isclose(breaks[-1], T, rel_tol=1e-14):
            raise ValueError("breakpoints must start at 0 and end at T")
        if any(b1 <= b0 for b0, b1 in zip(breaks, breaks[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breaks", breaks[:-1] + (T,))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "T", T)

    @cached_property
    def _arrays(self):
        return np.asarray(self.breaks), np.asarray(self.values)

    def _eval(self, t):
        return self.eval_side(t, +1)

    def eval_side(self, t, side):
        br, vals = self._arrays
        t = np.mod(np.asarray(t, dtype=float), self.T)
        if side < 0:
            # left limit at t = 0 is the last piece (periodic extension)
            t = np.where(t == 0.0, self.T, t)
            idx = np.searchsorted(br, t, side="left") - 1
        else:
            idx = np.searchsorted(br, t, side="right") - 1
        return vals[np.clip(idx, 0, len(vals) - 1)]

    @property
    def breakpoints(self):
        return self.breaks

    def _pieces_on(self, lo, hi):
        br, vals = self._arrays
        mask = (br[1:] > lo) & (br[:-1] < hi)
        return vals[mask]

    def extrema(self, lo=0.0, hi=None):
        hi = self.T if hi is None else hi
        v = self._pieces_on(lo, hi)
        return float(v.min()), float(v.max())

    def integral(self):
        br, vals = self._arrays
        return float(np.dot(np.diff(br), vals))

    def abs_pow_integral(self, p, positive_part):
        br, vals = self._arrays
        v = np.maximum(vals, 0.0) if positive_part else np.abs(vals)
        return float(np.dot(np.diff(br), v**p))

    def affine(self, scale=1.0, offset=0.0):
        return PiecewiseConstant(self.breaks, [scale * v + offset for v in self.values], self.T)

    def with_period(self, T_new, scale=1.0):
        f = T_new / self.T
        breaks = [b * f for b in self.breaks[:-1]] + [T_new]
        return PiecewiseConstant(breaks, [scale * v for v in self.values], T_new)

    def to_dict(self):
        return {
            "T": self.T,
            "kind": "piecewise",
            "breakpoints": list(self.breaks),
            "values": list(self.values),
        }


@dataclass(frozen=True)
class SampledGrid(ScalarCoefficient):
    values: tuple
    T: float

    def __post_init__(self):
        _check_period(self.T)
        values = tuple(float(v) for v in self.values)
        if len(values) < 2:
            raise ValueError("SampledGrid needs at least 2 samples")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "T", float(self.T))

    @cached_property
    def _arrays(self):
        v = np.asarray(self.values)
        t = np.arange(len(v) + 1) * (self.T / len(v))
        return t, np.append(v, v[0])

    def _eval(self, t):
        tt, vv = self._arrays
        return np.interp(t, tt, vv)

    @property
    def breakpoints(self):
        return tuple(self._arrays[0])

    def extrema(self, lo=0.0, hi=None):
        hi = self.T if hi is None else hi
        tt, vv = self._arrays
        inside = vv[(tt > lo) & (tt < hi)]
        ends = self(np.array([lo, hi])) if hi < self.T or lo > 0 else vv[[0, -1]]
        allv = np.concatenate([inside, np.atleast_1d(ends)])
        return float(allv.min()), float(allv.max())

    def integral(self):
        return float(np.mean(self.values) * self.T)

    def abs_pow_integral(self, p, positive_part):
        tt, vv = self._arrays
        h = tt[1] - tt[0]
        return float(np.sum(_linear_abs_pow(vv[:-1], vv[1:], h, p, positive_part)))

    def affine(self, scale=1.0, offset=0.0):
        return SampledGrid([scale * v + offset for v in self.values], self.T)

    def with_period(self, T_new, scale=1.0):
        return SampledGrid([scale * v for v in self.values], T_new)

    def to_dict(self):
        return {"T": self.T, "kind": "samples", "values": list(self.values)}


def _linear_abs_pow(y0, y1, h, p, positive_part):
    """Exact integral of |y|^p (or (y+)^p) for y linear from y0 to y1 over length h."""
    y0 = np.asarray(y0, dtype=float)
    y1 = np.asarray(y1, dtype=float)
    out = np.zeros(np.broadcast(y0, y1).shape)
    cross = (y0 * y1) < 0
    same = ~cross

    # same sign (or touching zero)
    a, b = np.abs(y0[same]), np.abs(y1[same])
    keep = np.ones_like(a, dtype=bool)
    if positive_part:
        keep = (y0[same] + y1[same]) > 0
    diff = b - a
    big = np.abs(diff) > 1e-8 * np.maximum(np.maximum(a, b), 1e-300)
    val = np.empty_like(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        val[big] = h * (b[big] ** (p + 1) - a[big] ** (p + 1)) / ((p + 1) * diff[big])
    val[~big] = h * (0.5 * (a[~big] + b[~big])) ** p
    out[same] = np.where(keep, val, 0.0)

    # sign change: split at the root
    a, b = np.abs(y0[cross]), np.abs(y1[cross])
    s = a / (a + b)
    left = h * s * a**p / (p + 1)
    right = h * (1 - s) * b**p / (p + 1)
    if positive_part:
        left = np.where(y0[cross] > 0, left, 0.0)
        right = np.where(y1[cross] > 0, right, 0.0)
    out[cross] = left + right
    return out


def _gl_abs_pow(c, p, positive_part, panels):
    """Composite Gauss-Legendre for int |a|^p with panels split at sign changes."""
    T = c.T
    edges = np.linspace(0.0, T, panels + 1)
    probe = np.linspace(0.0, 1.0, 9)
    pts = edges[:-1, None] + np.diff(edges)[:, None] * probe[None, :]
    vals = c(pts)
    pieces = []
    for i in range(panels):
        lo, hi = edges[i], edges[i + 1]
        s = np.sign(vals[i])
        cuts = [lo]
        for j in range(len(probe) - 1):
            if s[j] * s[j + 1] < 0:
                cuts.append(brentq(c, pts[i, j], pts[i, j + 1], xtol=1e-12))
        cuts.append(hi)
        pieces.extend(zip(cuts[:-1], cuts[1:]))
    pieces = np.asarray(pieces)
    mid = 0.5 * (pieces[:, 0] + pieces[:, 1])
    half = 0.5 * (pieces[:, 1] - pieces[:, 0])
    x = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    y = c(x)
    y = np.maximum(y, 0.0) if positive_part else np.abs(y)
    return float(np.sum(half[:, None] * _GL_WEIGHTS[None, :] * y**p))


def _refined_extrema(c, lo, hi, samples):
    """Dense sampling followed by bounded 1D refinement around the best samples."""
    t = np.linspace(lo, hi, samples + 1)
    v = c(t)
    dt = t[1] - t[0]
    out = []
    for sign in (1.0, -1.0):
        i = int(np.argmin(sign * v))
        a, b = max(lo, t[i] - dt), min(hi, t[i] + dt)
        best = sign * v[i]
        if b > a:
            res = minimize_scalar(
                lambda s: sign * float(c(s)), bounds=(a, b), method="bounded",
                options={"xatol": 1e-13},
            )
            best = min(best, float(res.fun))
        out.append(sign * best)
    return out[0], out[1]


# -- operations -------------------------------------------------------------


def eval(c: ScalarCoefficient, t):  # noqa: A001 - operation name
    """Value of the periodic extension of ``c`` at ``t``."""
    return c(t)


def extrema(c: ScalarCoefficient, lo=0.0, hi=None):
    """(inf, sup) of ``c`` on ``[lo, hi]`` (defaults to one period)."""
    return c.extrema(lo, hi)


def lp_norm(c: ScalarCoefficient, p, positive_part=True):
    """L^p norm over one period of ``a+`` (or of ``|a|`` when ``positive_part`` is off).

    ``p = inf`` gives the (essential) supremum.
    """
    p = float(p)
    if not p >= 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    if math.isinf(p):
        lo, hi = c.extrema()
        return max(hi, 0.0) if positive_part else max(abs(lo), abs(hi))
    return c.abs_pow_integral(p, positive_part) ** (1.0 / p)


def lp_norm_on(c: ScalarCoefficient, lo, hi, positive_part=True):
    """Supremum of ``a+`` (or ``|a|``) restricted to ``[lo, hi]``."""
    vmin, vmax = c.extrema(lo, hi)
    return max(vmax, 0.0) if positive_part else max(abs(vmin), abs(vmax))


def mean(c: ScalarCoefficient):
    """Integral of ``c`` over one period (not divided by ``T``)."""
    return c.integral()


class PrecVerdict(enum.Enum):
    HOLDS = "holds"
    FAILS_SOMEWHERE = "fails_somewhere"
    NOWHERE_STRICT = "nowhere_strict"


def check_prec(c: ScalarCoefficient, lam, sample_count=1024):
    """Sampled check of ``lam < a`` in the sense ``a >= lam`` with strictness somewhere.

    Samples are ``t_i = i T / sample_count``. For representations whose
    infimum is not read off exactly, the sampled minimum is also refined
    locally so a dip between samples is not missed.
    """
    if sample_count < 16:
        raise ValueError("sample_count must be >= 16")
    lam = float(lam)
    tol = 1e-12 * max(1.0, abs(lam))
    t = np.arange(sample_count) * (c.T / sample_count)
    v = c(t)
    vmin = float(v.min())
    if not c.is_exact_extremal:
        vmin = min(vmin, c.extrema()[0])
    elif not isinstance(c, Constant):
        vmin = min(vmin, c.extrema()[0])
    if vmin < lam - tol:
        return PrecVerdict.FAILS_SOMEWHERE
    if np.any(v > lam + tol):
        return PrecVerdict.HOLDS
    return PrecVerdict.NOWHERE_STRICT


def rescale_period(c: ScalarCoefficient, T_new):
    """Time-rescaled coefficient for the equivalent Hill equation of period ``T_new``.

    With ``s = t T_new / T`` the equation ``u'' + a(t) u = 0`` becomes
    ``v'' + (T / T_new)^2 a(s T / T_new) v = 0``; stability is unchanged.
    """
    return c.with_period(T_new, scale=(c.T / T_new) ** 2)


# -- matrix and spatial coefficients ----------------------------------------


@dataclass(frozen=True)
class MatrixCoefficient:
    """Symmetric n x n matrix of scalar coefficients sharing one period."""

    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.entries)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ValueError("entries must be a square array")
        T = rows[0][0].T
        for i in range(n):
            for j in range(n):
                if not math.isclose(rows[i][j].T, T, rel_tol=1e-14):
                    raise ValueError("all entries must share one period")
                if rows[i][j] != rows[j][i]:
                    raise ValueError(f"matrix coefficient is not symmetric at ({i}, {j})")
        object.__setattr__(self, "entries", rows)

    @property
    def n(self):
        return len(self.entries)

    @property
    def T(self):
        return self.entries[0][0].T

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.empty(t.shape + (self.n, self.n))
        for i in range(self.n):
            for j in range(i, self.n):
                out[..., i, j] = self.entries[i][j](t)
                out[..., j, i] = out[..., i, j]
        return out

    def eval_side(self, t, side):
        t = np.asarray(t, dtype=float)
        out = np.empty(t.shape + (self.n, self.n))
        for i in range(self.n):
            for j in range(i, self.n):
                out[..., i, j] = self.entries[i][j].eval_side(t, side)
                out[..., j, i] = out[..., i, j]
        return out

    @property
    def breakpoints(self):
        pts = set()
        for row in self.entries:
            for e in row:
                pts.update(e.breakpoints)
        return tuple(sorted(pts))

    def diagonal(self):
        return [self.entries[i][i] for i in range(self.n)]

    def integral(self):
        return np.array([[e.integral() for e in row] for row in self.entries])

    def to_dict(self):
        return {
            "T": self.T,
            "kind": "matrix",
            "entries": [[e.to_dict() for e in row] for row in self.entries],
        }

    @classmethod
    def from_constant(cls, M, T):
        M = np.asarray(M, dtype=float)
        n = M.shape[0]
        return cls(tuple(tuple(Constant(M[i, j], T) for j in range(n)) for i in range(n)))

    @classmethod
    def diag(cls, coefficients):
        n = len(coefficients)
        T = coefficients[0].T
        zero = Constant(0.0, T)
        return cls(tuple(
            tuple(coefficients[i] if i == j else zero for j in range(n)) for i in range(n)
        ))


@dataclass(frozen=True, eq=False)
class SpatialCoefficient2D:
    """Real values sampled on the nodes of a Neumann grid (see :mod:`grids`).

    ``values`` is flat in node order, or has a trailing ``(n, n)`` block for
    matrix fields.
    """

    domain: Interval | Rectangle | Disc
    h: float
    values: np.ndarray

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("grid spacing must be positive")
        vals = np.asarray(self.values, dtype=float)
        nodes = node_count(self.domain, self.h)
        if vals.ndim == 1 or vals.ndim == 3:
            ok = vals.shape[0] == nodes
        else:
            ok = False
        if not ok:
            raise ValueError(f"expected {nodes} node values, got array of shape {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

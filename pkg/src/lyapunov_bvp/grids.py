"""Domains and node-centred finite-volume grids with Neumann closure.

Every grid provides node coordinates, lumped control-volume weights ``W``
and a symmetric stiffness matrix ``K`` with zero row sums, such that
``W^{-1} K`` approximates ``-Delta`` with homogeneous Neumann conditions.

* :class:`Interval` ``[0, L]``: nodes ``i h``; end cells have half width.
* :class:`Rectangle` ``[0, a] x [0, b]``: the 5-point stencil with
  reflected ghost nodes, written in symmetric form (half-weight boundary
  cells and boundary edges).
* :class:`Disc` of radius ``R``: polar finite volumes on rings
  ``r_j = j dr`` (``j = 1..nr``) with ``ntheta`` nodes each, plus a centre
  node whose control volume is the disc of radius ``dr/2``. The centre
  couples equally to every node of the first ring, which is the usual
  regularity closure at ``r = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

__all__ = ["Interval", "Rectangle", "Disc", "Grid", "build_grid", "node_count", "parse_domain"]


@dataclass(frozen=True)
class Interval:
    length: float

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("interval length must be positive")

    @property
    def dim(self):
        return 1

    @property
    def measure(self):
        return self.length

    def scaled(self, r):
        return Interval(self.length * r)

    def to_dict(self):
        return {"kind": "interval", "length": self.length}


@dataclass(frozen=True)
class Rectangle:
    a_len: float
    b_len: float

    def __post_init__(self):
        if not (self.a_len > 0 and self.b_len > 0):
            raise ValueError("rectangle sides must be positive")

    @property
    def dim(self):
        return 2

    @property
    def measure(self):
        return self.a_len * self.b_len

    def scaled(self, r):
        return Rectangle(self.a_len * r, self.b_len * r)

    def to_dict(self):
        return {"kind": "rectangle", "a": self.a_len, "b": self.b_len}


@dataclass(frozen=True)
class Disc:
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disc radius must be positive")

    @property
    def dim(self):
        return 2

    @property
    def measure(self):
        return math.pi * self.radius**2

    def scaled(self, r):
        return Disc(self.radius * r)

    def to_dict(self):
        return {"kind": "disc", "radius": self.radius}


def parse_domain(d):
    kind = d.get("kind")
    if kind == "interval":
        return Interval(float(d["length"]))
    if kind == "rectangle":
        return Rectangle(float(d["a"]), float(d["b"]))
    if kind == "disc":
        return Disc(float(d["radius"]))
    raise ValueError(f"unknown domain kind {kind!r}")


def _cells(length, h):
    n = max(1, int(round(length / h)))
    return n, length / n


def _disc_layout(R, h):
    nr, dr = _cells(R, h)
    ntheta = max(16, 4 * int(math.ceil(2 * math.pi * R / (4 * h))))
    return nr, dr, ntheta


def node_count(domain, h):
    if isinstance(domain, Interval):
        return _cells(domain.length, h)[0] + 1
    if isinstance(domain, Rectangle):
        return (_cells(domain.a_len, h)[0] + 1) * (_cells(domain.b_len, h)[0] + 1)
    if isinstance(domain, Disc):
        nr, _, nt = _disc_layout(domain.radius, h)
        return 1 + nr * nt
    raise TypeError(f"unsupported domain {domain!r}")


@dataclass(frozen=True, eq=False)
class Grid:
    """Assembled grid data; ``coords`` has shape (nodes, dim)."""

    domain: object
    h: float
    coords: np.ndarray
    weights: np.ndarray
    K: sp.csr_matrix
    shape: tuple
    metadata: dict

    @property
    def n(self):
        return self.weights.size

    def integrate(self, values):
        return float(np.dot(self.weights, values))

    def laplacian(self, u):
        """Discrete ``Delta u`` (Neumann), i.e. ``-W^{-1} K u``."""
        return -(self.K @ u) / self.weights


def _assemble(n, i, j, c):
    """Stiffness from edge list (i, j, conductance)."""
    i = np.asarray(i)
    j = np.asarray(j)
    c = np.asarray(c, dtype=float)
    rows = np.concatenate([i, j, i, j])
    cols = np.concatenate([j, i, i, j])
    vals = np.concatenate([-c, -c, c, c])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def _interval_grid(dom, h):
    n, dx = _cells(dom.length, h)
    x = np.arange(n + 1) * dx
    w = np.full(n + 1, dx)
    w[[0, -1]] = dx / 2
    idx = np.arange(n)
    K = _assemble(n + 1, idx, idx + 1, np.full(n, 1.0 / dx))
    return x[:, None], w, K, (n + 1,), {"cells": n, "dx": dx}


def _rectangle_grid(dom, h):
    nx, dx = _cells(dom.a_len, h)
    ny, dy = _cells(dom.b_len, h)
    X, Y = np.meshgrid(np.arange(nx + 1) * dx, np.arange(ny + 1) * dy, indexing="ij")
    wx = np.full(nx + 1, dx)
    wx[[0, -1]] = dx / 2
    wy = np.full(ny + 1, dy)
    wy[[0, -1]] = dy / 2
    W = np.outer(wx, wy)
    idx = np.arange((nx + 1) * (ny + 1)).reshape(nx + 1, ny + 1)
    # x-edges: conductance = (cell height) / dx
    ex_i = idx[:-1, :].ravel()
    ex_j = idx[1:, :].ravel()
    ex_c = np.broadcast_to(wy[None, :] / dx, (nx, ny + 1)).ravel()
    ey_i = idx[:, :-1].ravel()
    ey_j = idx[:, 1:].ravel()
    ey_c = np.broadcast_to(wx[:, None] / dy, (nx + 1, ny)).ravel()
    K = _assemble(idx.size, np.concatenate([ex_i, ey_i]), np.concatenate([ex_j, ey_j]),
                  np.concatenate([ex_c, ey_c]))
    coords = np.column_stack([X.ravel(), Y.ravel()])
    return coords, W.ravel(), K, (nx + 1, ny + 1), {"cells": (nx, ny), "dx": dx, "dy": dy}


def _disc_grid(dom, h):
    R = dom.radius
    nr, dr, nt = _disc_layout(R, h)
    dth = 2 * math.pi / nt
    r = np.arange(1, nr + 1) * dr
    th = np.arange(nt) * dth
    node = 1 + np.arange(nr * nt).reshape(nr, nt)  # node[j-1, k]
    n = 1 + nr * nt

    width = np.full(nr, dr)
    width[-1] = dr / 2
    w = np.empty(n)
    w[0] = math.pi * (dr / 2) ** 2
    inner = r - dr / 2
    outer = np.minimum(r + dr / 2, R)
    w[1:] = np.repeat(0.5 * (outer**2 - inner**2) * dth, nt)

    ii, jj, cc = [], [], []
    # centre to first ring
    ii.append(np.zeros(nt, dtype=int))
    jj.append(node[0])
    cc.append(np.full(nt, (dr / 2) * dth / dr))
    # radial edges between ring j and j+1
    if nr > 1:
        rhalf = r[:-1] + dr / 2
        ii.append(node[:-1].ravel())
        jj.append(node[1:].ravel())
        cc.append(np.repeat(rhalf * dth / dr, nt))
    # angular edges within ring
    ii.append(node.ravel())
    jj.append(np.roll(node, -1, axis=1).ravel())
    cc.append(np.repeat(width / (r * dth), nt))
    K = _assemble(n, np.concatenate(ii), np.concatenate(jj), np.concatenate(cc))

    Rg, Tg = np.meshgrid(r, th, indexing="ij")
    coords = np.vstack([[0.0, 0.0], np.column_stack([(Rg * np.cos(Tg)).ravel(), (Rg * np.sin(Tg)).ravel()])])
    return coords, w, K, (nr, nt), {"rings": nr, "dr": dr, "ntheta": nt}


@lru_cache(maxsize=32)
def build_grid(domain, h):
    """Assemble (and cache) the Neumann grid of ``domain`` with spacing ``h``."""
    h = float(h)
    if not h > 0:
        raise ValueError("grid spacing must be positive")
    if isinstance(domain, Interval):
        parts = _interval_grid(domain, h)
    elif isinstance(domain, Rectangle):
        parts = _rectangle_grid(domain, h)
    elif isinstance(domain, Disc):
        parts = _disc_grid(domain, h)
    else:
        raise TypeError(f"unsupported domain {domain!r}")
    coords, w, K, shape, meta = parts
    coords.setflags(write=False)
    w.setflags(write=False)
    meta = dict(meta, nodes=int(w.size), closure="finite-volume, lumped mass")
    return Grid(domain, h, coords, w, K.tocsr(), shape, meta)

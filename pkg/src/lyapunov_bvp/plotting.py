"""Figures written to SVG (or any matplotlib format) with reproducible bytes.

The SVG hash salt is fixed and the creation date is omitted so identical
data produce identical files.
"""
from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402

__all__ = ["save_figure", "stability_chart", "discriminant_plot", "profile_plot", "field_plot"]

_RC = {"svg.hashsalt": "lyapunov-bvp", "font.size": 9, "axes.grid": False}


def save_figure(fig, path):
    """Save and close ``fig``; the format follows the file extension."""
    path = os.fspath(path)
    ext = os.path.splitext(path)[1].lstrip(".").lower() or "svg"
    meta = {"Date": None} if ext == "svg" else ({"CreationDate": None} if ext == "pdf" else None)
    with matplotlib.rc_context(_RC):
        tmp = path + ".part"
        fig.savefig(tmp, format=ext, metadata=meta)
        os.replace(tmp, path)
    plt.close(fig)
    return path


def _edges(centres):
    """Cell edges for cell centres (midpoints; half a spacing outside the ends)."""
    c = np.asarray(centres, dtype=float)
    if c.size == 1:
        return np.array([c[0] - 0.5, c[0] + 0.5])
    mid = 0.5 * (c[1:] + c[:-1])
    return np.concatenate([[c[0] - (mid[0] - c[0])], mid, [c[-1] + (c[-1] - mid[-1])]])


def stability_chart(sweep, certified=None, title="Stability chart", path=None):
    """Class map of a parameter sweep, one filled rectangle per cell.

    Colours: grey failed, blue stable, orange boundary, red unstable.

    ``certified`` is an optional boolean array of the same shape, drawn as
    hatching over the cells certified by a Lyapunov-type criterion.
    """
    grid = sweep.class_grid()  # (len(alphas), len(betas))
    cmap = ListedColormap(["#bbbbbb", "#2b8cbe", "#fdae6b", "#d7301f"])
    with matplotlib.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.5, 4.2))
        a, b = np.asarray(sweep.alphas, float), np.asarray(sweep.betas, float)
        ax.pcolormesh(_edges(a), _edges(b), (grid + 1).T, cmap=cmap, vmin=-0.5, vmax=3.5,
                      shading="flat", edgecolors="none")
        if certified is not None:
            cert = np.asarray(certified, dtype=float)
            ax.contourf(a, b, cert.T, levels=[0.5, 1.5], colors="none", hatches=["///"])
            ax.contour(a, b, cert.T, levels=[0.5], colors="k", linewidths=0.6)
        ax.set_xlabel(r"$\alpha$")
        ax.set_ylabel(r"$\beta$")
        ax.set_title(title)
        handles = [plt.Rectangle((0, 0), 1, 1, color=cmap(i)) for i in (1, 2, 3)]
        ax.legend(handles, ["stable", "boundary", "unstable"], loc="upper left", fontsize=7,
                  framealpha=0.8)
        fig.tight_layout()
    if path:
        save_figure(fig, path)
    return fig


def discriminant_plot(lams, delta, eigen_periodic=(), eigen_antiperiodic=(), path=None):
    """Discriminant curve with the periodic and antiperiodic eigenvalues marked."""
    with matplotlib.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 3.5))
        ax.plot(lams, np.clip(delta, -6, 6), color="k", lw=1)
        ax.axhline(2, color="#2b8cbe", lw=0.7, ls="--")
        ax.axhline(-2, color="#d7301f", lw=0.7, ls="--")
        ax.plot(eigen_periodic, [2] * len(eigen_periodic), "o", color="#2b8cbe", ms=4,
                label="periodic")
        ax.plot(eigen_antiperiodic, [-2] * len(eigen_antiperiodic), "s", color="#d7301f", ms=4,
                label="antiperiodic")
        ax.set_xlabel(r"$\lambda$")
        ax.set_ylabel(r"$\Delta(\lambda)$ (clipped)")
        ax.legend(fontsize=7)
        fig.tight_layout()
    if path:
        save_figure(fig, path)
    return fig


def profile_plot(x, curves, labels=None, xlabel="t", ylabel="u", title=None, path=None):
    """One or more 1D profiles on a common abscissa."""
    with matplotlib.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.5, 3.2))
        curves = [curves] if np.ndim(curves[0]) == 0 else curves
        labels = labels or [None] * len(curves)
        for y, lab in zip(curves, labels):
            ax.plot(x, y, lw=1.2, label=lab)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if any(labels):
            ax.legend(fontsize=7)
        fig.tight_layout()
    if path:
        save_figure(fig, path)
    return fig


def field_plot(coords, values, title=None, path=None):
    """Nodal field on a 2D grid (triangulated colour map) or a 1D profile."""
    coords = np.asarray(coords)
    values = np.asarray(values, dtype=float)
    if coords.ndim == 1 or coords.shape[1] == 1:
        return profile_plot(coords.reshape(-1), values, xlabel="x", ylabel="u", title=title,
                            path=path)
    with matplotlib.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4.8, 4.0))
        tc = ax.tricontourf(coords[:, 0], coords[:, 1], values, levels=24, cmap="viridis")
        fig.colorbar(tc, ax=ax, shrink=0.85)
        ax.set_aspect("equal")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        if title:
            ax.set_title(title)
        fig.tight_layout()
    if path:
        save_figure(fig, path)
    return fig

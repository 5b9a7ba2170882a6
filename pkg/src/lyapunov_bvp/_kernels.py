"""Compiled fixed-step RK4 transfer kernels.

The coefficient is supplied as per-step stage values: the right limit at
the step start, the midpoint value and the left limit at the step end, so
that steps aligned to breakpoints never straddle a jump.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def scalar_transfer(a0, am, a1, hs, lams):
    """Monodromy of ``u'' + (lam + a) u = 0`` and its lam-derivative.

    Returns arrays ``phi`` and ``dphi`` of shape (len(lams), 2, 2). Columns
    of ``phi`` are the solutions with initial data (1, 0) and (0, 1).
    """
    L = lams.size
    phi = np.empty((L, 2, 2))
    dphi = np.empty((L, 2, 2))
    for m in range(L):
        lam = lams[m]
        for col in range(2):
            u = 1.0 if col == 0 else 0.0
            v = 0.0 if col == 0 else 1.0
            du = 0.0
            dv = 0.0
            for k in range(hs.size):
                h = hs[k]
                q0 = lam + a0[k]
                qm = lam + am[k]
                q1 = lam + a1[k]
                # stage 1
                k1u = v
                k1v = -q0 * u
                k1du = dv
                k1dv = -q0 * du - u
                # stage 2
                u2 = u + 0.5 * h * k1u
                v2 = v + 0.5 * h * k1v
                du2 = du + 0.5 * h * k1du
                dv2 = dv + 0.5 * h * k1dv
                k2u = v2
                k2v = -qm * u2
                k2du = dv2
                k2dv = -qm * du2 - u2
                # stage 3
                u3 = u + 0.5 * h * k2u
                v3 = v + 0.5 * h * k2v
                du3 = du + 0.5 * h * k2du
                dv3 = dv + 0.5 * h * k2dv
                k3u = v3
                k3v = -qm * u3
                k3du = dv3
                k3dv = -qm * du3 - u3
                # stage 4
                u4 = u + h * k3u
                v4 = v + h * k3v
                du4 = du + h * k3du
                dv4 = dv + h * k3dv
                k4u = v4
                k4v = -q1 * u4
                k4du = dv4
                k4dv = -q1 * du4 - u4
                u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
                v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
                du += h / 6.0 * (k1du + 2.0 * k2du + 2.0 * k3du + k4du)
                dv += h / 6.0 * (k1dv + 2.0 * k2dv + 2.0 * k3dv + k4dv)
            phi[m, 0, col] = u
            phi[m, 1, col] = v
            dphi[m, 0, col] = du
            dphi[m, 1, col] = dv
    return phi, dphi


@njit(cache=True)
def scalar_trajectory(a0, am, a1, hs, u0, v0):
    """Values (u, u') at every step boundary for one initial condition."""
    N = hs.size
    out = np.empty((N + 1, 2))
    u = u0
    v = v0
    out[0, 0] = u
    out[0, 1] = v
    for k in range(N):
        h = hs[k]
        k1u = v
        k1v = -a0[k] * u
        k2u = v + 0.5 * h * k1v
        k2v = -am[k] * (u + 0.5 * h * k1u)
        k3u = v + 0.5 * h * k2v
        k3v = -am[k] * (u + 0.5 * h * k2u)
        k4u = v + h * k3v
        k4v = -a1[k] * (u + h * k3u)
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        out[k + 1, 0] = u
        out[k + 1, 1] = v
    return out


@njit(cache=True)
def matrix_transfer(A0, Am, A1, hs):
    """Fundamental matrix (2n x 2n) of ``u'' + A(t) u = 0`` from the identity."""
    n = A0.shape[1]
    U = np.zeros((n, 2 * n))
    V = np.zeros((n, 2 * n))
    for i in range(n):
        U[i, i] = 1.0
        V[i, n + i] = 1.0
    for k in range(hs.size):
        h = hs[k]
        k1u = V
        k1v = -A0[k] @ U
        k2u = V + 0.5 * h * k1v
        k2v = -Am[k] @ (U + 0.5 * h * k1u)
        k3u = V + 0.5 * h * k2v
        k3v = -Am[k] @ (U + 0.5 * h * k2u)
        k4u = V + h * k3v
        k4v = -A1[k] @ (U + h * k3u)
        U = U + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        V = V + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    M = np.empty((2 * n, 2 * n))
    M[:n, :] = U
    M[n:, :] = V
    return M

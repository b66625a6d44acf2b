"""Numba-jitted chain kernels; same contract as _kernels_numpy.

Loops over segments explicitly; nopython + nogil so concurrent optimizer
rounds can overlap. Keep the math in sync with _kernels_numpy.
"""

import numpy as np
from numba import njit

_EPS_LEN = 1e-12
_BRANCH_SLACK = 1e-12

BACKEND_NAME = "numba"


def warmup():
    """Force JIT compilation of both kernels for 2D and 3D inputs."""
    for dim in (2, 3):
        P = np.zeros((2, dim))
        P[1, dim - 1] = 1.0
        U = np.zeros((1, dim))
        time_chain(P, U, 1.0)
        energy_chain(P, U, 1.0, 1.0)


@njit(cache=True, nogil=True)
def time_chain(P, U, V):
    n = P.shape[0] - 1
    dim = P.shape[1]
    G = np.zeros((n, dim))
    total = 0.0
    for k in range(n):
        d2 = 0.0
        b = 0.0
        uu = 0.0
        for j in range(dim):
            dxj = P[k + 1, j] - P[k, j]
            d2 += dxj * dxj
            b += dxj * U[k, j]
            uu += U[k, j] * U[k, j]
        if d2 <= _EPS_LEN * _EPS_LEN:
            continue
        disc = b * b + d2 * (V * V - uu)
        if disc < 0.0:
            return np.inf, G, False
        s = np.sqrt(disc)
        denom = b + s
        if denom <= _EPS_LEN:
            return np.inf, G, False
        t = d2 / denom
        total += t
        if s <= _EPS_LEN:
            s = 1.0
        for j in range(dim):
            dxj = P[k + 1, j] - P[k, j]
            G[k, j] = (dxj - t * U[k, j]) / s
    return total, G, True


@njit(cache=True, nogil=True)
def energy_chain(P, U, V, C):
    n = P.shape[0] - 1
    dim = P.shape[1]
    G = np.zeros((n, dim))
    total = 0.0
    for k in range(n):
        d2 = 0.0
        b = 0.0
        uu = 0.0
        for j in range(dim):
            dxj = P[k + 1, j] - P[k, j]
            d2 += dxj * dxj
            b += dxj * U[k, j]
            uu += U[k, j] * U[k, j]
        if d2 <= _EPS_LEN * _EPS_LEN:
            continue
        if uu == 0.0 and C == 0.0:
            return np.inf, G, False
        d = np.sqrt(d2)
        a = b / d
        m = np.sqrt(uu + C)
        s2 = 2.0 * uu + C - 2.0 * a * m
        if s2 <= V * V + _BRANCH_SLACK:
            total += 2.0 * m * d - 2.0 * b
            for j in range(dim):
                dxj = P[k + 1, j] - P[k, j]
                G[k, j] = 2.0 * (dxj * (m / d) - U[k, j])
        else:
            disc = b * b + d2 * (V * V - uu)
            if disc < 0.0:
                return np.inf, G, False
            s = np.sqrt(disc)
            denom = b + s
            if denom <= _EPS_LEN:
                return np.inf, G, False
            t = d2 / denom
            total += (V * V + C) * t
            if s <= _EPS_LEN:
                s = 1.0
            for j in range(dim):
                dxj = P[k + 1, j] - P[k, j]
                G[k, j] = (V * V + C) * (dxj - t * U[k, j]) / s
    return total, G, True

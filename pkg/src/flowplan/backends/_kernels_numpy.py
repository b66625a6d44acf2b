"""Pure-numpy chain kernels: per-segment costs and displacement gradients.

Both kernels take the chain's point matrix P ((n+2, dim), start through goal)
and the per-segment flow matrix U ((n+1, dim)) and return
(total cost, G, feasible) where G[k] is the gradient of segment k's cost with
respect to its displacement. Zero-length segments contribute zero cost and
zero gradient. Infeasible chains return (inf, zeros, False).

Mirrors _kernels_numba exactly; keep the two in sync.
"""

import numpy as np

_EPS_LEN = 1e-12
_BRANCH_SLACK = 1e-12

BACKEND_NAME = "numpy"


def warmup():
    P = np.array([[0.0, 0.0], [0.0, 1.0]])
    U = np.array([[0.0, 0.0]])
    time_chain(P, U, 1.0)
    energy_chain(P, U, 1.0, 1.0)


def time_chain(P, U, V):
    dx = P[1:] - P[:-1]
    d2 = np.einsum("ij,ij->i", dx, dx)
    b = np.einsum("ij,ij->i", dx, U)
    uu = np.einsum("ij,ij->i", U, U)
    live = d2 > _EPS_LEN * _EPS_LEN
    disc = b * b + d2 * (V * V - uu)
    bad = live & (disc < 0.0)
    disc = np.where(disc < 0.0, 0.0, disc)
    s = np.sqrt(disc)
    denom = b + s
    bad |= live & (denom <= _EPS_LEN)
    safe_denom = np.where(denom <= _EPS_LEN, 1.0, denom)
    t = np.where(live, d2 / safe_denom, 0.0)
    if np.any(bad):
        return np.inf, np.zeros_like(dx), False
    safe_s = np.where(live, np.where(s <= _EPS_LEN, 1.0, s), 1.0)
    G = np.where(live[:, None], (dx - t[:, None] * U) / safe_s[:, None], 0.0)
    return float(np.sum(t)), G, True


def energy_chain(P, U, V, C):
    dx = P[1:] - P[:-1]
    d2 = np.einsum("ij,ij->i", dx, dx)
    d = np.sqrt(d2)
    b = np.einsum("ij,ij->i", dx, U)
    uu = np.einsum("ij,ij->i", U, U)
    live = d > _EPS_LEN
    degenerate = live & (uu == 0.0) & (C == 0.0)
    safe_d = np.where(live, d, 1.0)
    a = b / safe_d
    m = np.sqrt(uu + C)
    s2 = 2.0 * uu + C - 2.0 * a * m
    unconstrained = s2 <= V * V + _BRANCH_SLACK

    cost_u = 2.0 * m * d - 2.0 * b
    G_u = 2.0 * (dx * (m / safe_d)[:, None] - U)

    disc = b * b + d2 * (V * V - uu)
    bad = live & ~unconstrained & (disc < 0.0)
    disc = np.where(disc < 0.0, 0.0, disc)
    s = np.sqrt(disc)
    denom = b + s
    bad |= live & ~unconstrained & (denom <= _EPS_LEN)
    bad |= degenerate
    safe_denom = np.where(denom <= _EPS_LEN, 1.0, denom)
    t = d2 / safe_denom
    cost_c = (V * V + C) * t
    safe_s = np.where(s <= _EPS_LEN, 1.0, s)
    G_c = (V * V + C) * (dx - t[:, None] * U) / safe_s[:, None]

    if np.any(bad):
        return np.inf, np.zeros_like(dx), False
    cost = np.where(live, np.where(unconstrained, cost_u, cost_c), 0.0)
    G = np.where(live[:, None], np.where(unconstrained[:, None], G_u, G_c), 0.0)
    return float(np.sum(cost)), G, True

"""Closed-form segment costs, chain cost/gradient, and value-function oracles.

Two objectives are supported. Time: the vehicle always moves at full speed V
and the segment cost is its duration. Energy: the Lagrangian is squared
vehicle speed plus a constant running cost C; each segment either runs at the
unconstrained optimal speed or saturates at V (the max-speed branch).

Per-segment quantities are derived for a straight displacement crossed under
one constant flow u. Infeasible segments (flow faster than the vehicle and
not helping) carry an infinite cost marker instead of raising, so that a
diffusion step landing there is rejected by backtracking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backends
from .errors import DegenerateInputError, SceneValidationError, SingularInputError
from .geometry import FlowScene, JunctionChain

_EPS_LEN = 1e-12
_BRANCH_SLACK = 1e-12  # applied toward the unconstrained branch at the switch


@dataclass(frozen=True)
class CostModel:
    """Objective description: kind is "time" or "energy"."""

    kind: str
    V: float
    C: float = 0.0

    def __post_init__(self):
        if self.kind not in ("time", "energy"):
            raise SceneValidationError(f"unknown cost kind {self.kind!r}")
        if not (self.V > 0.0):
            raise SceneValidationError("vehicle speed V must be positive")
        if self.C < 0.0:
            raise SceneValidationError("running cost C must be nonnegative")

    @property
    def is_time(self) -> bool:
        return self.kind == "time"


def time_model(V: float) -> CostModel:
    return CostModel(kind="time", V=float(V))


def energy_model(V: float, C: float) -> CostModel:
    return CostModel(kind="energy", V=float(V), C=float(C))


@dataclass(frozen=True)
class SegmentSolution:
    """Vehicle velocity, duration, and cost for one straight segment."""

    v: np.ndarray
    t: float
    cost: float
    max_speed_branch: bool

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.cost)


def _infeasible(dim: int) -> SegmentSolution:
    return SegmentSolution(
        v=np.full(dim, np.nan), t=math.inf, cost=math.inf, max_speed_branch=True
    )


def time_segment(dx, u, V: float) -> SegmentSolution:
    """Minimum-time crossing of displacement dx under constant flow u.

    The vehicle moves at full speed; the ground speed along the segment is
    a + sqrt(a^2 + V^2 - |u|^2) with a the flow component along the segment.
    Returns an infinite-cost marker when the flow outruns the vehicle and
    does not carry it forward.
    """
    dx = np.asarray(dx, dtype=float)
    u = np.asarray(u, dtype=float)
    d = float(np.linalg.norm(dx))
    if d <= _EPS_LEN:
        raise SceneValidationError("time_segment requires a nonzero displacement")
    a = float(np.dot(dx, u)) / d
    disc = a * a + V * V - float(np.dot(u, u))
    if disc < 0.0:
        return _infeasible(len(dx))
    speed = a + math.sqrt(disc)
    if speed <= _EPS_LEN:
        return _infeasible(len(dx))
    t = d / speed
    v = dx * (speed / d) - u
    return SegmentSolution(v=v, t=t, cost=t, max_speed_branch=True)


def t_star_max_speed(dx, u, V: float) -> float:
    """Crossing duration at saturated speed: positive root of
    (|u|^2 - V^2) t^2 - 2 (dx.u) t + |dx|^2 = 0, evaluated in the
    rationalized form that stays finite as V approaches |u|.
    """
    dx = np.asarray(dx, dtype=float)
    u = np.asarray(u, dtype=float)
    d2 = float(np.dot(dx, dx))
    if d2 <= _EPS_LEN * _EPS_LEN:
        raise SceneValidationError("t_star_max_speed requires a nonzero displacement")
    b = float(np.dot(dx, u))
    uu = float(np.dot(u, u))
    disc = b * b + d2 * (V * V - uu)
    if disc < 0.0:
        return math.inf
    denom = b + math.sqrt(disc)
    if denom <= _EPS_LEN:
        if abs(V * V - uu) <= 1e-12 * max(1.0, uu):
            raise SingularInputError(
                "V equals the flow speed with the flow not helping; no finite crossing time"
            )
        return math.inf
    return d2 / denom


def energy_segment(dx, u, V: float, C: float) -> SegmentSolution:
    """Minimum-energy crossing of dx under flow u with running cost C.

    The unconstrained optimal vehicle speed satisfies
    |v|^2 = 2|u|^2 + C - 2 a sqrt(|u|^2 + C); if that exceeds V^2 the vehicle
    saturates at V and the cost becomes (V^2 + C) t*.
    """
    dx = np.asarray(dx, dtype=float)
    u = np.asarray(u, dtype=float)
    d = float(np.linalg.norm(dx))
    if d <= _EPS_LEN:
        raise SceneValidationError("energy_segment requires a nonzero displacement")
    uu = float(np.dot(u, u))
    if C == 0.0 and uu == 0.0:
        raise DegenerateInputError(
            "energy cost needs C > 0 in still water: the infimum is not attained"
        )
    b = float(np.dot(dx, u))
    a = b / d
    m = math.sqrt(uu + C)
    s2 = 2.0 * uu + C - 2.0 * a * m
    if s2 <= V * V + _BRANCH_SLACK:
        t = d / m
        v = dx * (m / d) - u
        cost = 2.0 * m * d - 2.0 * b
        return SegmentSolution(v=v, t=t, cost=cost, max_speed_branch=False)
    t = t_star_max_speed(dx, u, V)
    if not math.isfinite(t):
        return _infeasible(len(dx))
    v = dx / t - u
    cost = (V * V + C) * t
    return SegmentSolution(v=v, t=t, cost=cost, max_speed_branch=True)


def segment_grad(dx, u, model: CostModel) -> np.ndarray:
    """Gradient of the segment cost with respect to the displacement dx."""
    dx = np.asarray(dx, dtype=float)
    u = np.asarray(u, dtype=float)
    d2 = float(np.dot(dx, dx))
    b = float(np.dot(dx, u))
    uu = float(np.dot(u, u))
    if model.is_time:
        s = math.sqrt(b * b + d2 * (model.V ** 2 - uu))
        t = d2 / (b + s)
        return (dx - t * u) / s
    d = math.sqrt(d2)
    a = b / d
    m = math.sqrt(uu + model.C)
    s2 = 2.0 * uu + model.C - 2.0 * a * m
    if s2 <= model.V ** 2 + _BRANCH_SLACK:
        return 2.0 * (dx * (m / d) - u)
    s = math.sqrt(b * b + d2 * (model.V ** 2 - uu))
    t = d2 / (b + s)
    return (model.V ** 2 + model.C) * (dx - t * u) / s


def validate_model(scene: FlowScene, model: CostModel) -> None:
    """Reject an energy model with C = 0 on a scene holding still water."""
    if model.is_time:
        return
    if model.C == 0.0:
        for r in scene.regions:
            if float(np.dot(r.flow, r.flow)) == 0.0:
                raise DegenerateInputError(
                    f"energy model with C = 0 is degenerate in zero-flow region {r.id}"
                )


def solve_segment(dx, u, model: CostModel) -> SegmentSolution:
    if model.is_time:
        return time_segment(dx, u, model.V)
    return energy_segment(dx, u, model.V, model.C)


def _chain_arrays(scene: FlowScene, chain: JunctionChain, lambdas=None):
    """Contiguous (points, flows) arrays for kernel evaluation."""
    lams = chain.lambdas if lambdas is None else lambdas
    pts = [chain.start]
    for bi, lam in zip(chain.boundaries, lams):
        pts.append(scene.boundaries[bi].point_unchecked(lam))
    pts.append(chain.goal)
    P = np.ascontiguousarray(np.vstack(pts), dtype=float)
    U = np.ascontiguousarray(
        np.vstack([scene.flow_of(rid) for rid in chain.region_sequence]), dtype=float
    )
    return P, U


def chain_cost(scene: FlowScene, chain: JunctionChain, model: CostModel) -> float:
    """Total cost over the chain's segments; inf if any segment is infeasible.

    Zero-length segments contribute nothing (coincident junctions are merged
    by chain repair before differentiation, but cost evaluation tolerates
    them).
    """
    validate_model(scene, model)
    P, U = _chain_arrays(scene, chain)
    k = backends.kernels()
    if model.is_time:
        cost, _, _ = k.time_chain(P, U, model.V)
    else:
        cost, _, _ = k.energy_chain(P, U, model.V, model.C)
    return float(cost)


def chain_grad(scene: FlowScene, chain: JunctionChain, model: CostModel) -> np.ndarray:
    """Gradient of the chain cost with respect to the stacked parameters.

    Each junction's parameter receives the difference of the gradients of its
    two incident segments, mapped through the boundary parametrization.
    """
    cost, grad = chain_cost_grad(scene, chain, model)
    if not math.isfinite(cost):
        raise SceneValidationError("cannot differentiate an infeasible chain")
    return grad


def chain_cost_grad(
    scene: FlowScene, chain: JunctionChain, model: CostModel, lambdas=None
) -> tuple[float, np.ndarray]:
    """(cost, stacked-parameter gradient) in one kernel pass."""
    validate_model(scene, model)
    P, U = _chain_arrays(scene, chain, lambdas)
    kmod = backends.kernels()
    if model.is_time:
        cost, G, feasible = kmod.time_chain(P, U, model.V)
    else:
        cost, G, feasible = kmod.energy_chain(P, U, model.V, model.C)
    parts = []
    for i, bi in enumerate(chain.boundaries):
        J = scene.boundaries[bi].jacobian()
        parts.append(J.T @ (G[i] - G[i + 1]))
    grad = np.concatenate(parts) if parts else np.empty(0)
    if not feasible:
        return math.inf, np.zeros_like(grad)
    return float(cost), grad


def chain_solutions(
    scene: FlowScene, chain: JunctionChain, model: CostModel
) -> list[SegmentSolution]:
    """Per-segment solutions along the chain (reference scalar path)."""
    validate_model(scene, model)
    P, _ = _chain_arrays(scene, chain)
    out = []
    for k, rid in enumerate(chain.region_sequence):
        dx = P[k + 1] - P[k]
        if float(np.linalg.norm(dx)) <= _EPS_LEN:
            out.append(SegmentSolution(v=np.zeros(scene.dimension), t=0.0, cost=0.0,
                                       max_speed_branch=False))
            continue
        out.append(solve_segment(dx, scene.flow_of(rid), model))
    return out


def segment_value(x0, x, t: float, u, model: CostModel) -> float:
    """Single-region value function: least cost to reach x from x0 in time t.

    Time model: the minimal crossing time if it does not exceed t, else +inf.
    Energy model: the straight-line crossing cost at exactly time t if the
    implied vehicle speed is admissible, else +inf.
    """
    if not (t > 0.0):
        raise SceneValidationError("segment_value requires t > 0")
    x0 = np.asarray(x0, dtype=float)
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    dx = x - x0
    d = float(np.linalg.norm(dx))
    if model.is_time:
        if d <= _EPS_LEN:
            return 0.0
        sol = time_segment(dx, u, model.V)
        if not sol.feasible or sol.t > t:
            return math.inf
        return sol.t
    v = dx / t - u
    if float(np.linalg.norm(v)) > model.V * (1.0 + 1e-9):
        return math.inf
    d2 = float(np.dot(dx, dx))
    b = float(np.dot(dx, u))
    return d2 / t - 2.0 * b + (model.C + float(np.dot(u, u))) * t

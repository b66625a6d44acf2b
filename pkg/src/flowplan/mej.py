"""Intermittent-diffusion optimizer over junction chains.

The junction parameters follow a forward-Euler discretization of a noisy
gradient flow: bursts of additive noise alternate with plain descent, and the
best local minimum over all rounds wins. Whenever a parameter leaves its
boundary's domain the chain is repaired: the offending boundary is swapped
for the unique boundary fan around the corner it slid past, and any region
revisit the swap creates is cut out of the chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .cost import CostModel, SegmentSolution, chain_cost_grad, chain_solutions, validate_model
from .errors import (
    AmbiguousRerouteError,
    InvalidRerouteError,
    PlanningFailureError,
)
from .geometry import (
    GEOM_TOL,
    FlowScene,
    JunctionChain,
    corner_reroute,
    find_corner,
    initial_chain,
)

_MONOTONE_SLACK = 1e-9
_MAX_BACKTRACKS = 30
_MAX_REPAIR_PASSES = 64
_STALL_WINDOW = 200
_STALL_DECREASE = 1e-14
_MAX_PHASE_RESTARTS = 8


@dataclass(frozen=True)
class IDSchedule:
    """Step sizes, noise schedule, and stopping rules for the optimizer.

    sigma0 = None selects the default noise amplitude, one tenth of the mean
    boundary parameter-domain diameter. sigma0 = 0 degenerates to plain
    gradient descent.
    """

    h: float = 1e-3
    rounds: int = 20
    perturb_duration: int = 50
    sigma0: float | None = None
    grad_tol: float = 1e-8
    max_descent_steps: int = 20000
    seed: int = 0

    def __post_init__(self):
        if not (self.h > 0.0):
            raise ValueError("step size h must be positive")
        if self.rounds < 1:
            raise ValueError("rounds must be a positive integer")
        if self.perturb_duration < 0:
            raise ValueError("perturb_duration must be nonnegative")
        if self.sigma0 is not None and self.sigma0 < 0.0:
            raise ValueError("sigma0 must be nonnegative")
        if not (self.grad_tol > 0.0):
            raise ValueError("grad_tol must be positive")
        if self.max_descent_steps < 1:
            raise ValueError("max_descent_steps must be positive")

    def resolve_sigma0(self, scene: FlowScene) -> float:
        if self.sigma0 is not None:
            return float(self.sigma0)
        diam = [1.0 if b.dimension == 2 else b.length for b in scene.boundaries]
        return 0.1 * (sum(diam) / len(diam)) if diam else 0.0


@dataclass(frozen=True)
class LocalMinimum:
    """One distinct local minimum over all rounds."""

    boundaries: tuple[int, ...]
    lambdas: tuple
    junction_points: tuple
    cost: float
    co_optimal: bool


@dataclass
class PlanResult:
    """Optimizer output: best chain plus every distinct local minimum found."""

    chain: JunctionChain
    junction_points: list[np.ndarray]
    per_segment: list[SegmentSolution]
    cost: float
    round_costs: list[float]
    local_minima: list[LocalMinimum]
    diagnostics: dict = field(default_factory=dict)


def euler_step(lam: np.ndarray, grad: np.ndarray, h: float, sigma: float, noise: np.ndarray) -> np.ndarray:
    """One forward-Euler update of the noisy gradient flow, unclamped."""
    lam = np.asarray(lam, dtype=float)
    grad = np.asarray(grad, dtype=float)
    noise = np.asarray(noise, dtype=float)
    if lam.shape != grad.shape or lam.shape != noise.shape:
        raise ValueError("lam, grad, and noise must share one shape")
    return lam - h * grad + sigma * math.sqrt(h) * noise


class _Events:
    """Mutable repair/step counters shared down the call stack."""

    __slots__ = ("corner_events", "clamps", "cycles_deleted", "merges",
                 "rejected_steps", "oscillations")

    def __init__(self):
        self.corner_events = 0
        self.clamps = 0
        self.cycles_deleted = 0
        self.merges = 0
        self.rejected_steps = 0
        self.oscillations = 0

    def merge_from(self, other: "_Events"):
        for k in self.__slots__:
            setattr(self, k, getattr(self, k) + getattr(other, k))

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__slots__}


def _nudged_lambda(b, corner_point: np.ndarray, eps_corner: float) -> np.ndarray:
    """Parameter on boundary b near the corner, eps_corner into the domain."""
    lam_c = b.param_of(corner_point)
    if b.dimension == 2:
        eps = min(eps_corner, 0.01 * b.length) / b.length
        val = lam_c[0]
        val = eps if val < 0.5 else 1.0 - eps
        return np.array([val])
    # 3D: move from the extent vertex toward the extent centroid.
    centroid = b.extent.mean(axis=0)
    step = centroid - lam_c
    n = float(np.linalg.norm(step))
    if n <= GEOM_TOL:
        return b.param_clamp(lam_c)
    eps = min(eps_corner, 0.01 * b.length)
    return b.param_clamp(lam_c + step * (eps / n))


def _delete_cycles(chain: JunctionChain, events: _Events) -> bool:
    """Cut out chain sections that exit and later re-enter one region."""
    changed = False
    while True:
        seen: dict[int, int] = {}
        hit = None
        for idx, rid in enumerate(chain.region_sequence):
            if rid in seen:
                hit = (seen[rid], idx)
                break
            seen[rid] = idx
        if hit is None:
            return changed
        i, j = hit
        del chain.boundaries[i:j]
        del chain.lambdas[i:j]
        del chain.region_sequence[i:j]
        events.cycles_deleted += 1
        changed = True


def _apply_reroute(scene, chain, i, span, new_bids, corner_point, eps_corner, events):
    """Replace chain.boundaries[i:i+span] with new_bids around corner_point."""
    new_lams = [_nudged_lambda(scene.boundaries[bi], corner_point, eps_corner) for bi in new_bids]
    regions = [chain.region_sequence[i]]
    for bi in new_bids:
        regions.append(scene.boundaries[bi].other(regions[-1]))
    if regions[-1] != chain.region_sequence[i + span]:
        raise InvalidRerouteError("rerouted fan does not reach the entered region")
    chain.boundaries[i:i + span] = list(new_bids)
    chain.lambdas[i:i + span] = new_lams
    chain.region_sequence[i:i + span + 1] = regions
    events.corner_events += 1


def _repair_out_of_domain(scene, chain, eps_corner, events) -> bool:
    """Handle every junction whose parameter left its domain. True if changed."""
    changed = False
    i = 0
    while i < len(chain.boundaries):
        b = scene.boundaries[chain.boundaries[i]]
        lam = np.atleast_1d(chain.lambdas[i])
        if b.param_contains(lam):
            i += 1
            continue
        changed = True
        if b.dimension == 2:
            val = float(lam[0])
            endpoint = b.p1 if val > 1.0 else b.p2
            # The corner sits on the domain edge itself, so an exit past an
            # end with a corner always transits it; clamping is reserved for
            # cornerless ends (scene hull walls).
            corner = find_corner(scene, endpoint)
            if corner is not None:
                try:
                    new_bids = corner_reroute(
                        scene, corner.point,
                        chain.region_sequence[i], chain.region_sequence[i + 1],
                        offended=chain.boundaries[i],
                    )
                    _apply_reroute(scene, chain, i, 1, new_bids, corner.point, eps_corner, events)
                    i += len(new_bids)
                    continue
                except (InvalidRerouteError, AmbiguousRerouteError):
                    pass
        chain.lambdas[i] = b.param_clamp(lam)
        events.clamps += 1
        i += 1
    return changed


def _merge_collisions(scene, chain, eps_corner, events) -> bool:
    """Treat coincident consecutive junctions as a corner event at their midpoint."""
    pts = chain.junction_points(scene)
    for i in range(len(pts) - 1):
        if float(np.linalg.norm(pts[i + 1] - pts[i])) > GEOM_TOL:
            continue
        if chain.region_sequence[i] == chain.region_sequence[i + 2]:
            continue  # a region revisit: the cycle pass deletes it
        mid = 0.5 * (pts[i] + pts[i + 1])
        corner = find_corner(scene, mid)
        if corner is None:
            continue
        try:
            new_bids = corner_reroute(
                scene, corner.point,
                chain.region_sequence[i], chain.region_sequence[i + 2],
                offended=chain.boundaries[i],
            )
        except (InvalidRerouteError, AmbiguousRerouteError):
            continue
        _apply_reroute(scene, chain, i, 2, new_bids, corner.point, eps_corner, events)
        events.merges += 1
        return True
    return False


def repair_chain(
    scene: FlowScene,
    chain: JunctionChain,
    lam_proposed,
    eps_corner: float | None = None,
    events: _Events | None = None,
) -> tuple[JunctionChain, np.ndarray]:
    """Restore chain validity after a proposed parameter update.

    Out-of-domain parameters trigger a corner reroute (the junction slid past
    a corner: swap in the boundary fan around it, seeding new junctions
    eps_corner inside their domains) or, where no corner exists within reach,
    a clamp onto the domain face. Region revisits created by rerouting are
    deleted, and coincident junction pairs collapse through their corner.
    In-domain junctions keep their proposed parameters. Idempotent.
    """
    if eps_corner is None:
        lengths = [b.length for b in scene.boundaries]
        eps_corner = 0.01 * min(lengths) if lengths else 0.0
    if events is None:
        events = _Events()
    out = chain.copy()
    if isinstance(lam_proposed, np.ndarray) and lam_proposed.ndim == 1:
        out.lambdas = out.split_stacked(scene, lam_proposed.astype(float))
    else:
        out.lambdas = [np.atleast_1d(np.asarray(l, dtype=float)).copy() for l in lam_proposed]
    for _ in range(_MAX_REPAIR_PASSES):
        changed = _repair_out_of_domain(scene, out, eps_corner, events)
        changed |= _delete_cycles(out, events)
        changed |= _merge_collisions(scene, out, eps_corner, events)
        if not changed:
            break
    else:
        for i, bi in enumerate(out.boundaries):
            out.lambdas[i] = scene.boundaries[bi].param_clamp(out.lambdas[i])
        _delete_cycles(out, events)
    return out, out.stacked()


@dataclass
class _PhaseResult:
    chain: JunctionChain
    lam: np.ndarray
    cost: float
    steps: int
    converged: bool
    reason: str = ""


def _phase(scene, chain, lam, model, schedule, sigma, max_steps, rng, monotone, events):
    """Shared Euler-step loop for noisy and plain phases.

    Monotone phases reject cost increases (backtracking) and return the best
    configuration seen; noisy phases accept any feasible move and return the
    endpoint so the diffusion actually displaces the state.
    """
    chain = chain.copy()
    lam = np.asarray(lam, dtype=float).copy()
    cost, grad = chain_cost_grad(scene, chain, model, chain.split_stacked(scene, lam))
    best = _PhaseResult(chain.copy(), lam.copy(), cost, 0, False)
    prev_transition = None
    converged = False
    reason = "steps"
    steps_done = 0

    h_cur = schedule.h

    for step in range(max_steps):
        if monotone and math.isfinite(cost) and (
            grad.size == 0 or float(np.max(np.abs(grad))) < schedule.grad_tol
        ):
            converged = True
            reason = "converged"
            break
        def try_ladder(noise_vec):
            """Halve the step up to the backtrack cap; best acceptable move wins.

            A rejected move whose repair crossed a corner is retried with the
            offending junctions held on their boundary (clamped) instead, one
            at a time when several exit at once, so a junction pinned against
            a cost-increasing corner cannot block progress elsewhere.
            """
            nonlocal h_cur
            h_eff = h_cur if monotone else schedule.h
            for _ in range(_MAX_BACKTRACKS + 1):
                if math.isfinite(cost):
                    lam_prop = euler_step(lam, grad, h_eff, sigma, noise_vec)
                else:
                    lam_prop = lam + sigma * math.sqrt(h_eff) * noise_vec  # wander until feasible
                gnorm = float(np.max(np.abs(grad))) if grad.size and math.isfinite(cost) else 1.0
                eps_c = 10.0 * h_eff * max(1.0, gnorm)

                def evaluate(prop):
                    ev = _Events()
                    cand_chain, cand_lam = repair_chain(scene, chain, prop, eps_c, ev)
                    cand_cost, cand_grad = chain_cost_grad(
                        scene, cand_chain, model, cand_chain.lambdas
                    )
                    return (cand_chain, cand_lam, cand_cost, cand_grad), ev

                cand, ev = evaluate(lam_prop)
                ok = math.isfinite(cand[2]) and (
                    not monotone or cand[2] <= cost + _MONOTONE_SLACK
                )
                if not math.isfinite(cost) and not monotone:
                    ok = True  # still lost: any move keeps the wander going
                if ok:
                    events.merge_from(ev)
                    if monotone:
                        h_cur = min(h_eff * 2.0, 1024.0 * schedule.h)
                    return cand
                if monotone and ev.corner_events > 0:
                    parts = chain.split_stacked(scene, lam_prop)
                    clamped = [
                        scene.boundaries[bi].param_clamp(p)
                        for bi, p in zip(chain.boundaries, parts)
                    ]
                    moved = [
                        j for j, (p, c) in enumerate(zip(parts, clamped))
                        if not np.array_equal(np.atleast_1d(p), np.atleast_1d(c))
                    ]
                    variants = []
                    if moved:
                        variants.append([np.atleast_1d(c) for c in clamped])
                    if len(moved) >= 2:
                        for j in moved:
                            variants.append([
                                np.atleast_1d(parts[i] if i == j else clamped[i])
                                for i in range(len(parts))
                            ])
                    pick = None
                    for v in variants:
                        cand2, ev2 = evaluate(np.concatenate(v))
                        if math.isfinite(cand2[2]) and cand2[2] <= cost + _MONOTONE_SLACK:
                            if pick is None or cand2[2] < pick[0][2]:
                                pick = (cand2, ev2)
                    if pick is not None:
                        events.merge_from(pick[1])
                        h_cur = min(h_eff * 2.0, 1024.0 * schedule.h)
                        return pick[0]
                h_eff *= 0.5
            return None

        noise = rng.standard_normal(lam.shape[0]) if sigma > 0.0 else np.zeros_like(lam)
        move = try_ladder(noise)
        if move is None and sigma > 0.0:
            move = try_ladder(rng.standard_normal(lam.shape[0]))
        accepted = move is not None
        if accepted:
            chain2, lam2, cost2, grad2 = move
        steps_done = step + 1
        if not accepted:
            events.rejected_steps += 1
            if monotone:
                reason = "no_move"
                break  # no descent direction left at this step size
            continue
        transition = None
        if chain2.signature() != chain.signature():
            transition = (chain.signature(), chain2.signature())
        chain, lam, cost, grad = chain2, lam2, cost2, grad2
        if cost < best.cost - _STALL_DECREASE:
            best = _PhaseResult(chain.copy(), lam.copy(), cost, step + 1, False)
        if monotone and step + 1 - best.steps >= _STALL_WINDOW:
            # accepted steps are only jittering on a plateau
            converged = True
            reason = "stalled"
            break
        if monotone and transition is not None and prev_transition is not None:
            if transition == (prev_transition[1], prev_transition[0]):
                events.oscillations += 1
                reason = "oscillation"
                break  # switching between two chains: terminate the descent
        if transition is not None:
            prev_transition = transition

    if monotone:
        best.converged = converged
        best.steps = steps_done
        best.reason = reason
        return best
    return _PhaseResult(chain, lam, cost, steps_done, False, "noisy_end")


def _settle(scene, chain, lam, model, schedule, rng, events):
    """Descend to a chain-stable configuration, restarting after oscillation.

    A descent that stops because the chain flipped back and forth between two
    boundary lists returns its best-seen state mid-flip; resuming from that
    state either keeps descending (the flip was a genuine transit) or rejects
    every move and stops cleanly. Bounded restarts keep this finite.
    """
    best = None
    cur_chain, cur_lam = chain, lam
    for _ in range(_MAX_PHASE_RESTARTS):
        res = _phase(
            scene, cur_chain, cur_lam, model, schedule,
            sigma=0.0, max_steps=schedule.max_descent_steps, rng=rng,
            monotone=True, events=events,
        )
        if best is None or res.cost < best.cost:
            best = res
        if res.reason != "oscillation":
            break
        cur_chain, cur_lam = res.chain, res.lam
    return best


def _polish(scene, chain, lam, model, schedule, events):
    """Fixed-chain clamped descent so face-constrained junctions land exactly.

    Runs after a phase; the chain is frozen and parameters are clamped to
    their domains (no repair), so optima pinned to a domain face stop
    oscillating at the repair tolerance.
    """
    lams = chain.split_stacked(scene, lam)
    cost, grad = chain_cost_grad(scene, chain, model, lams)
    if not math.isfinite(cost):
        return chain, lam, cost

    def clamp(stacked):
        parts = chain.split_stacked(scene, stacked)
        return [scene.boundaries[bi].param_clamp(p) for bi, p in zip(chain.boundaries, parts)]

    for _ in range(2000):
        if grad.size == 0:
            break
        h_eff = schedule.h
        improved = False
        for _ in range(_MAX_BACKTRACKS + 1):
            cand = clamp(lam - h_eff * grad)
            cost2, grad2 = chain_cost_grad(scene, chain, model, cand)
            if math.isfinite(cost2) and cost2 <= cost - _STALL_DECREASE:
                lam = np.concatenate([np.atleast_1d(c) for c in cand])
                cost, grad = cost2, grad2
                improved = True
                break
            h_eff *= 0.5
        if not improved:
            break
    out = chain.copy()
    out.lambdas = chain.split_stacked(scene, lam)
    return out, lam, cost


def descend(
    scene: FlowScene,
    chain: JunctionChain,
    lam,
    model: CostModel,
    schedule: IDSchedule,
) -> tuple[JunctionChain, np.ndarray, float]:
    """Plain gradient descent with repair until the gradient is small,
    the chain oscillates between two boundary lists, or the step cap hits.
    Returns the best configuration seen.
    """
    validate_model(scene, model)
    events = _Events()
    rng = np.random.default_rng(schedule.seed)
    res = _phase(
        scene, chain, np.asarray(lam, dtype=float), model, schedule,
        sigma=0.0, max_steps=schedule.max_descent_steps, rng=rng,
        monotone=True, events=events,
    )
    return res.chain, res.lam, res.cost


def _run_round(scene, base_chain, base_lam, model, schedule, sigma, rng, events):
    noisy = _phase(
        scene, base_chain, base_lam, model, schedule,
        sigma=sigma, max_steps=schedule.perturb_duration, rng=rng,
        monotone=False, events=events,
    )
    settled = _settle(scene, noisy.chain, noisy.lam, model, schedule, rng, events)
    if not math.isfinite(settled.cost):
        return settled.chain, settled.lam, settled.cost
    return _polish(scene, settled.chain, settled.lam, model, schedule, events)


def optimize(
    scene: FlowScene,
    x0,
    xf,
    model: CostModel,
    schedule: IDSchedule | None = None,
    threads: int = 1,
) -> PlanResult:
    """Full intermittent-diffusion search from the straight-line chain.

    A base descent settles the straight-line chain first; every round then
    perturbs that base configuration with its own noise stream (amplitude
    decaying linearly over rounds) and descends again. Rounds are independent
    and may run on a thread pool; the result is the argmin over rounds plus
    the list of distinct local minima, with ties to the best cost within 1e-6
    flagged co-optimal.
    """
    schedule = schedule or IDSchedule()
    validate_model(scene, model)
    events = _Events()
    chain0 = initial_chain(scene, x0, xf)
    base = _settle(
        scene, chain0, chain0.stacked(), model, schedule,
        np.random.default_rng(schedule.seed), events,
    )
    if math.isfinite(base.cost):
        base_chain, base_lam, base_cost = _polish(
            scene, base.chain, base.lam, model, schedule, events
        )
    else:
        base_chain, base_lam, base_cost = base.chain, base.lam, base.cost

    sigma0 = schedule.resolve_sigma0(scene)
    N = schedule.rounds
    seeds = np.random.SeedSequence(schedule.seed).spawn(N)
    round_events = [_Events() for _ in range(N)]

    def launch(i):
        rng = np.random.default_rng(seeds[i - 1])
        sigma_i = sigma0 * (1.0 - (i - 1.0) / N)
        return _run_round(
            scene, base_chain, base_lam, model, schedule, sigma_i, rng,
            round_events[i - 1],
        )

    if threads > 1 and N > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(launch, range(1, N + 1)))
    else:
        results = [launch(i) for i in range(1, N + 1)]
    for ev in round_events:
        events.merge_from(ev)

    candidates = [(base_chain, base_lam, base_cost)] + results
    round_costs = [c for _, _, c in candidates]
    finite = [(i, c) for i, (_, _, c) in enumerate(candidates) if math.isfinite(c)]
    if not finite:
        raise PlanningFailureError(
            "no feasible chain found in any round", diagnostics=events.as_dict()
        )
    best_i = min(finite, key=lambda t: (t[1], t[0]))[0]
    best_chain, best_lam, best_cost = candidates[best_i]

    minima: list[LocalMinimum] = []
    for chain, lam, cost in candidates:
        if not math.isfinite(cost):
            continue
        pts = chain.junction_points(scene)
        is_new = True
        for m in minima:
            if len(m.junction_points) == len(pts) and all(
                float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) <= 1e-3
                for a, b in zip(m.junction_points, pts)
            ):
                is_new = False
                break
        if is_new:
            minima.append(LocalMinimum(
                boundaries=tuple(chain.boundaries),
                lambdas=tuple(tuple(np.atleast_1d(l)) for l in chain.lambdas),
                junction_points=tuple(tuple(p) for p in pts),
                cost=cost,
                co_optimal=False,
            ))
    minima.sort(key=lambda m: m.cost)
    minima = [
        LocalMinimum(m.boundaries, m.lambdas, m.junction_points, m.cost,
                     co_optimal=(m.cost <= best_cost + 1e-6))
        for m in minima
    ]

    diagnostics = events.as_dict()
    diagnostics["rounds"] = N
    from . import backends

    diagnostics["backend"] = backends.active_name()
    return PlanResult(
        chain=best_chain,
        junction_points=best_chain.junction_points(scene),
        per_segment=chain_solutions(scene, best_chain, model),
        cost=best_cost,
        round_costs=round_costs,
        local_minima=minima,
        diagnostics=diagnostics,
    )

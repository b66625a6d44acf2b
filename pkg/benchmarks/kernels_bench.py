"""Kernel backend timing: jitted loops against the vectorized fallback.

Times the chain cost/gradient kernels on batches of random chains at several
chain lengths, and one full planner run per backend. Run from the repo root:

    python3 benchmarks/kernels_bench.py [--repeats 5] [--batch 2000]
"""

import argparse
import os
import time

import numpy as np

from flowplan import IDSchedule, backends, optimize, time_model
from flowplan.fixtures import fixture


def random_batch(rng, batch, n, dim, V):
    chains = []
    for _ in range(batch):
        P = np.cumsum(rng.normal(scale=2.0, size=(n + 1, dim)), axis=0)
        for k in range(n):
            if np.linalg.norm(P[k + 1] - P[k]) < 0.2:
                P[k + 1] = P[k] + 0.2 * rng.normal(size=dim)
        U = rng.normal(size=(n, dim))
        scale = rng.uniform(0.0, 0.85, size=n) * V
        U *= (scale / np.maximum(np.linalg.norm(U, axis=1), 1e-12))[:, None]
        chains.append((np.ascontiguousarray(P), np.ascontiguousarray(U)))
    return chains


def time_backend(mod, chains, V, C, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        acc = 0.0
        for P, U in chains:
            c, _, ok = mod.time_chain(P, U, V)
            if ok:
                acc += c
            c, _, ok = mod.energy_chain(P, U, V, C)
            if ok:
                acc += c
        best = min(best, time.perf_counter() - t0)
    return best, acc


def plan_time(backend_name, repeats):
    fx = fixture("jet")
    model = time_model(fx.V)
    sched = IDSchedule(**{**fx.schedule.__dict__})
    saved = os.environ.get("FLOWPLAN_BACKEND")
    os.environ["FLOWPLAN_BACKEND"] = backend_name
    backends.reset()
    best = np.inf
    cost = None
    try:
        for _ in range(repeats):
            t0 = time.perf_counter()
            res = optimize(fx.scene, fx.start, fx.goal, model, sched, threads=1)
            best = min(best, time.perf_counter() - t0)
            cost = res.cost
    finally:
        if saved is None:
            os.environ.pop("FLOWPLAN_BACKEND", None)
        else:
            os.environ["FLOWPLAN_BACKEND"] = saved
        backends.reset()
    return best, cost


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--batch", type=int, default=2000)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    V, C = 3.0, 1.5
    nb = backends.kernels("numba")
    npy = backends.kernels("numpy")
    nb.warmup()

    print(f"{'case':<26} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    print("-" * 58)
    for dim in (2, 3):
        for n in (1, 2, 4, 8):
            chains = random_batch(rng, args.batch, n, dim, V)
            t_nb, a = time_backend(nb, chains, V, C, args.repeats)
            t_np, b = time_backend(npy, chains, V, C, args.repeats)
            assert abs(a - b) <= 1e-6 * max(1.0, abs(a)), "backends disagree"
            label = f"{dim}D chains, {n} junction{'s' if n > 1 else ''}"
            print(f"{label:<26} {t_nb * 1e3:>8.1f}ms {t_np * 1e3:>8.1f}ms "
                  f"{t_np / t_nb:>7.1f}x")

    for name in ("numba", "numpy"):
        t, cost = plan_time(name, max(2, args.repeats // 2))
        print(f"{'jet plan (' + name + ')':<26} {t:>9.2f}s   cost {cost:.4f}")


if __name__ == "__main__":
    main()

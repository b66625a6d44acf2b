import numpy as np
import pytest

from flowplan import IDSchedule, backends, optimize, time_model
from flowplan.cost import energy_model
from flowplan.fixtures import fixture

import oracles


@pytest.fixture
def restore_backend():
    # drop the cache after the test; the next kernels() call re-reads the
    # (by then restored) environment
    yield
    backends.reset()


def _random_chain_arrays(rng, n, dim, V):
    P = rng.normal(scale=4.0, size=(n + 1, dim))
    # stretch tiny legs so every segment is crossable and non-degenerate
    for k in range(n):
        d = P[k + 1] - P[k]
        if np.linalg.norm(d) < 0.2:
            P[k + 1] = P[k] + 0.2 * rng.normal(size=dim)
    U = rng.normal(size=(n, dim))
    scale = rng.uniform(0.0, 0.85, size=n) * V
    U *= (scale / np.maximum(np.linalg.norm(U, axis=1), 1e-12))[:, None]
    return np.ascontiguousarray(P), np.ascontiguousarray(U)


def test_kernels_agree_on_random_chains():
    nb = backends.kernels("numba")
    npy = backends.kernels("numpy")
    rng = np.random.default_rng(0)
    V, C = 3.0, 1.7
    for trial in range(200):
        dim = 2 if trial % 2 == 0 else 3
        n = int(rng.integers(1, 7))
        P, U = _random_chain_arrays(rng, n, dim, V)
        for args, a, b in (
            ((P, U, V), nb.time_chain(P, U, V), npy.time_chain(P, U, V)),
            ((P, U, V, C), nb.energy_chain(P, U, V, C), npy.energy_chain(P, U, V, C)),
        ):
            cost_a, G_a, ok_a = a
            cost_b, G_b, ok_b = b
            assert ok_a == ok_b
            if ok_a:
                assert cost_a == pytest.approx(cost_b, rel=1e-12, abs=1e-12)
                assert np.allclose(G_a, G_b, rtol=1e-10, atol=1e-12)


def test_kernels_agree_with_scalar_reference():
    """Both kernels must reproduce the per-segment closed forms."""
    rng = np.random.default_rng(1)
    V, C = 2.5, 0.8
    tmodel, emodel = time_model(V), energy_model(V, C)
    for mod in (backends.kernels("numba"), backends.kernels("numpy")):
        for _ in range(50):
            P, U = _random_chain_arrays(rng, int(rng.integers(1, 5)), 2, V)
            tc, _, ok = mod.time_chain(P, U, V)
            ec, _, ok_e = mod.energy_chain(P, U, V, C)
            ref_t = sum(float(oracles.leg_cost(P[k], P[k + 1], U[k], tmodel))
                        for k in range(len(U)))
            ref_e = sum(float(oracles.leg_cost(P[k], P[k + 1], U[k], emodel))
                        for k in range(len(U)))
            assert ok and ok_e
            assert tc == pytest.approx(ref_t, rel=1e-12)
            assert ec == pytest.approx(ref_e, rel=1e-12)


def test_infeasible_chain_flagged_by_both():
    P = np.array([[0.0, 0.0], [1.0, 0.0]])
    U = np.array([[-4.0, 0.0]])  # flow outruns the vehicle head-on
    for mod in (backends.kernels("numba"), backends.kernels("numpy")):
        cost, _, ok = mod.time_chain(P, U, 3.0)
        assert not ok and np.isinf(cost)
        cost_e, _, ok_e = mod.energy_chain(P, U, 3.0, 1.0)
        assert not ok_e and np.isinf(cost_e)


def test_zero_length_segment_costs_nothing():
    P = np.array([[0.0, 0.0], [1.0, 1.0], [1.0, 1.0], [2.0, 0.0]])
    U = np.zeros((3, 2))
    for mod in (backends.kernels("numba"), backends.kernels("numpy")):
        cost, G, ok = mod.time_chain(P, U, 2.0)
        assert ok
        assert cost == pytest.approx(np.sqrt(2.0))
        assert np.all(np.isfinite(G))


def test_env_variable_selects_backend(monkeypatch, restore_backend):
    monkeypatch.setenv("FLOWPLAN_BACKEND", "numpy")
    backends.reset()
    assert backends.active_name() == "numpy"
    monkeypatch.setenv("FLOWPLAN_BACKEND", "numba")
    backends.reset()
    assert backends.active_name() == "numba"
    monkeypatch.setenv("FLOWPLAN_BACKEND", "nonsense")
    backends.reset()
    with pytest.raises(ValueError):
        backends.active_name()


def test_explicit_name_bypasses_cache(restore_backend):
    assert backends.kernels("numpy").BACKEND_NAME == "numpy"
    assert backends.kernels("numba").BACKEND_NAME == "numba"
    with pytest.raises(ValueError):
        backends.kernels("fortran")


def test_full_plan_agrees_across_backends(monkeypatch, restore_backend):
    fx = fixture("jet")
    sched = IDSchedule(**{**fx.schedule.__dict__, "rounds": 3})
    model = time_model(fx.V)

    monkeypatch.setenv("FLOWPLAN_BACKEND", "numba")
    backends.reset()
    backends.warmup()
    a = optimize(fx.scene, fx.start, fx.goal, model, sched, threads=1)

    monkeypatch.setenv("FLOWPLAN_BACKEND", "numpy")
    backends.reset()
    b = optimize(fx.scene, fx.start, fx.goal, model, sched, threads=1)

    assert a.diagnostics["backend"] == "numba"
    assert b.diagnostics["backend"] == "numpy"
    assert a.cost == pytest.approx(b.cost, abs=1e-9)
    assert a.chain.boundaries == b.chain.boundaries
    assert np.allclose(np.concatenate(a.chain.lambdas),
                       np.concatenate(b.chain.lambdas), atol=1e-9)
    assert np.allclose(a.round_costs, b.round_costs, atol=1e-9)

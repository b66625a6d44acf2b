import time
from pathlib import Path

import pytest

from flowplan import IDSchedule, backends, optimize
from flowplan.cost import energy_model, time_model
from flowplan.fixtures import fixture

DATA_DIR = Path(__file__).resolve().parents[1] / "data"


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the jitted kernels once so timed assertions see steady state."""
    backends.warmup()


def run_fixture(name, kind="time", C=1.0, seed=0, threads=4, **overrides):
    """Plan a bundled fixture and return (fixture, result, wall seconds)."""
    fx = fixture(name)
    model = time_model(fx.V) if kind == "time" else energy_model(fx.V, C)
    sched = IDSchedule(**{**fx.schedule.__dict__, "seed": seed, **overrides})
    t0 = time.perf_counter()
    result = optimize(fx.scene, fx.start, fx.goal, model, sched, threads=threads)
    return fx, result, time.perf_counter() - t0

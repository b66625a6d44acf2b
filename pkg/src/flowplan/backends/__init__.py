"""Kernel backend selection.

The FLOWPLAN_BACKEND environment variable picks the implementation:
"numba" (jitted loops), "numpy" (vectorized fallback), or "auto" (numba when
importable, else numpy). The choice is resolved once per process on first
use; tests and benchmarks can grab a specific module via kernels(name).
"""

import os

_active = None


def kernels(name: str | None = None):
    """Return the kernel module for the requested or configured backend."""
    global _active
    if name is None:
        if _active is None:
            _active = _load(os.environ.get("FLOWPLAN_BACKEND", "auto"))
        return _active
    return _load(name)


def _load(name: str):
    if name == "numpy":
        from . import _kernels_numpy

        return _kernels_numpy
    if name == "numba":
        from . import _kernels_numba

        return _kernels_numba
    if name == "auto":
        try:
            from . import _kernels_numba

            return _kernels_numba
        except ImportError:
            from . import _kernels_numpy

            return _kernels_numpy
    raise ValueError(f"unknown backend {name!r}; expected auto, numba, or numpy")


def active_name() -> str:
    return kernels().BACKEND_NAME


def reset() -> None:
    """Drop the cached backend so the next call re-reads the environment."""
    global _active
    _active = None


def warmup() -> None:
    """Compile/patch the active backend ahead of timed sections."""
    kernels().warmup()

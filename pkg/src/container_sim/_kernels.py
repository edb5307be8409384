"""Hot state-update kernel: numba-jitted by default, pure-numpy fallback.

The per-step transition is the simulator's inner loop (the protocol server
budget is >= 10k steps/s), so it is compiled with numba when available.
Select the backend with the environment variable

    CONTAINER_SIM_BACKEND=numba|numpy

(default: numba when importable, numpy otherwise). Both backends produce
bitwise-identical results; see tests/test_kernels.py and
benchmarks/bench_step.py for the equivalence check and the comparison.
"""

from __future__ import annotations

import math
import os

import numpy as np

__all__ = ["step_transition", "active_backend", "available_backends", "step_impl"]

_ENV_VAR = "CONTAINER_SIM_BACKEND"


def _step_transition_numpy(volumes, timers, eps, alpha_step, delta, action,
                           actuation, per_product, product_size):
    """One state transition; see the numba twin below for the loop form.

    Returns (new_volumes, new_timers, free_pu, assigned_pu, emptied_volume)
    where free_pu is the lowest-index PU idle at decision time (-1 if none),
    assigned_pu is the PU that received work (-1 if none) and emptied_volume
    is only meaningful when assigned_pu >= 0.
    """
    idle = timers == 0.0
    free = int(idle.argmax()) if idle.any() else -1
    new_v = np.maximum(volumes + alpha_step + eps, 0.0)
    new_p = np.maximum(timers - delta, 0.0)
    assigned = -1
    emptied = -1.0
    if action > 0 and free >= 0:
        i = action - 1
        emptied = float(volumes[i])
        new_v[i] = 0.0
        # fresh work is not decayed in the step that assigns it
        new_p[free] = actuation[i] + per_product[i] * math.floor(emptied / product_size[i])
        assigned = free
    return new_v, new_p, free, assigned, emptied


def _step_transition_loops(volumes, timers, eps, alpha_step, delta, action,
                           actuation, per_product, product_size):
    n = volumes.shape[0]
    m = timers.shape[0]
    free = -1
    for j in range(m):
        if timers[j] == 0.0:
            free = j
            break
    new_v = np.empty(n)
    for i in range(n):
        x = volumes[i] + alpha_step[i] + eps[i]
        new_v[i] = x if x > 0.0 else 0.0
    new_p = np.empty(m)
    for j in range(m):
        x = timers[j] - delta
        new_p[j] = x if x > 0.0 else 0.0
    assigned = -1
    emptied = -1.0
    if action > 0 and free >= 0:
        i = action - 1
        emptied = volumes[i]
        new_v[i] = 0.0
        new_p[free] = actuation[i] + per_product[i] * math.floor(emptied / product_size[i])
        assigned = free
    return new_v, new_p, free, assigned, emptied


def _build_impls():
    impls = {"numpy": _step_transition_numpy}
    try:
        from numba import njit
    except ImportError:
        return impls
    impls["numba"] = njit(cache=True)(_step_transition_loops)
    return impls


_IMPLS = _build_impls()


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_IMPLS))


def _default_backend() -> str:
    requested = os.environ.get(_ENV_VAR, "").strip().lower()
    if requested:
        if requested not in _IMPLS:
            raise RuntimeError(
                f"{_ENV_VAR}={requested!r} is not available; "
                f"choose one of {', '.join(available_backends())}")
        return requested
    return "numba" if "numba" in _IMPLS else "numpy"


def step_impl(backend: str | None = None):
    """Kernel for an explicit backend, or the env-selected default."""
    if backend is None:
        return _IMPLS[_default_backend()]
    if backend not in _IMPLS:
        raise ValueError(f"unknown backend {backend!r}; "
                         f"choose one of {', '.join(available_backends())}")
    return _IMPLS[backend]


def active_backend() -> str:
    return _default_backend()


def step_transition(volumes, timers, eps, alpha_step, delta, action,
                    actuation, per_product, product_size):
    """Dispatch to the env-selected backend (resolved per call)."""
    return _IMPLS[_default_backend()](volumes, timers, eps, alpha_step, delta,
                                      action, actuation, per_product, product_size)

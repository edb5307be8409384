"""Pure scalar dynamics: volume random walk, PU processing time, timer decay.

These are the contract-level building blocks; the engine's vectorized hot
path lives in :mod:`container_sim._kernels` and is tested against them.
All functions are stateless; noise samples are drawn by the caller.
"""

from __future__ import annotations

import math

from .config import ContainerParams

__all__ = ["step_volume", "processing_time", "decay_timer"]


def step_volume(v: float, alpha_step: float, eps: float) -> float:
    """One random-walk-with-drift update: max(0, alpha_step + v + eps).

    ``eps`` is a single Normal(0, sigma_step^2) sample. No upper clamp:
    overflow is detected by the environment, not hidden here.
    """
    return max(0.0, alpha_step + v + eps)


def processing_time(v: float, p: ContainerParams) -> float:
    """Seconds a PU is busy transforming volume ``v`` of container ``p``.

    actuation_time + time_per_product * floor(v / product_size), with the
    floor taken on the exact double-precision quotient: values sitting a
    hair below an integer multiple are NOT rounded up, so config errors
    stay visible instead of being masked by float noise.
    """
    return p.actuation_time + p.time_per_product * math.floor(v / p.product_size)


def decay_timer(p: float, delta: float) -> float:
    """One busy-timer update: max(0, p - delta)."""
    return max(0.0, p - delta)

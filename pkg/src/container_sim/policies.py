"""Baseline controllers: rule-based, uniform-random, do-nothing.

A policy is any callable mapping a :class:`~container_sim.env.State` to an
integer action. The rule-based controller deliberately ignores PU timers:
it pays the penalty when it fires while every PU is busy.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .config import EnvConfig
from .env import DO_NOTHING, State

__all__ = ["POLICY_NAMES", "rule_based_action", "uniform_random_action",
           "do_nothing_action", "make_policy"]

POLICY_NAMES = ("rule-based", "random", "do-nothing")


def rule_based_action(state: State, cfg: EnvConfig, threshold: float = 1.0) -> int:
    """Empty the first container within ``threshold`` of its ideal volume.

    Returns Empty(i) for the lowest index i with |v_i - ideal_i| < threshold,
    else does nothing. Memoryless; never inspects the PU timers.
    """
    for i, p in enumerate(cfg.containers):
        if abs(state.volumes[i] - p.ideal_volume) < threshold:
            return i + 1
    return DO_NOTHING


def uniform_random_action(rng: np.random.Generator, n: int) -> int:
    """Uniform over the n+1 actions {0, 1, ..., n}."""
    return int(rng.integers(0, n + 1))


def do_nothing_action(state: State | None = None) -> int:
    return DO_NOTHING


def make_policy(name: str, cfg: EnvConfig, threshold: float = 1.0,
                rng: Optional[np.random.Generator] = None) -> Callable[[State], int]:
    """Policy callable for a CLI policy name ("rule-based"/"random"/"do-nothing")."""
    if name == "rule-based":
        if threshold <= 0:
            raise ValueError("threshold must be positive")
        return lambda state: rule_based_action(state, cfg, threshold)
    if name == "random":
        gen = rng if rng is not None else np.random.default_rng()
        n = cfg.n
        return lambda state: uniform_random_action(gen, n)
    if name == "do-nothing":
        return do_nothing_action
    raise ValueError(f"unknown policy {name!r}; choose one of {', '.join(POLICY_NAMES)}")

"""Deterministic reward: Gaussian emptying reward plus the full case analysis.

Case precedence (highest first):

1. any post-transition volume >= max_volume  ->  reward_min (overflow)
2. do-nothing action                         ->  0
3. no PU was free, or the container was
   already empty at decision time            ->  reward_penalty
4. otherwise                                 ->  emptying_reward(volume sent
                                                 to the PU)
"""

from __future__ import annotations

import math
from typing import TYPE_CHECKING, Optional

from .config import ContainerParams, EnvConfig

if TYPE_CHECKING:
    from .env import State

__all__ = ["emptying_reward", "reward"]


def emptying_reward(v: float, p: ContainerParams, r_pen: float) -> float:
    """Sum-of-Gaussians reward for emptying container ``p`` at volume ``v``.

    r_pen + sum_k (h_k - r_pen) * exp(-(v - v_k)^2 / (2 w_k^2)), evaluated
    in the listed peak order. With well-separated peaks the value lies in
    (r_pen, 1], reaching 1 exactly at the ideal optimum.
    """
    acc = r_pen
    for peak in p.optima:
        d = v - peak.volume
        acc += (peak.height - r_pen) * math.exp(-(d * d) / (2.0 * peak.width * peak.width))
    return acc


def reward(s_t: "State", action: int, s_next: "State", cfg: EnvConfig,
           pu_was_available: bool, emptied_volume: Optional[float]) -> float:
    """Reward for the transition (s_t, action) -> s_next.

    ``emptied_volume`` is the pre-emptying volume actually sent to a PU, or
    None when no PU was assigned. Overflow dominates every other case,
    including a simultaneous successful emptying of another container.
    """
    if max(s_next.volumes) >= cfg.max_volume:
        return cfg.reward_min
    if action == 0:                      # do-nothing
        return 0.0
    if not pu_was_available or emptied_volume == 0.0:
        return cfg.reward_penalty
    return emptying_reward(emptied_volume, cfg.containers[action - 1], cfg.reward_penalty)

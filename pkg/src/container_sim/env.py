"""The MDP state machine: seeded reset, state update, termination.

State is the vector of container volumes plus the vector of PU busy
timers. Actions are plain integers: 0 does nothing, i in 1..n empties
container i (1-based). Randomness comes from one numpy PCG64 generator
per episode; normal deviates use numpy's ziggurat ``standard_normal``,
which is deterministic for a fixed numpy version, so equal seeds give
bitwise-equal episodes.

Per step exactly n normal draws are consumed, in container index order,
regardless of the action (the emptied container's draw is consumed and
discarded). This keeps the noise stream aligned with the step index, so
replays and oracle checks cannot desynchronize on action choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .config import EnvConfig
from .reward import reward as transition_reward

__all__ = ["DO_NOTHING", "State", "StepResult", "EpisodeOver", "observe", "ContainerEnv"]

DO_NOTHING = 0


@dataclass(frozen=True)
class State:
    """MDP state at step ``t``: n volumes and m PU timers.

    Arrays are owned by the state and must not be mutated.
    """

    volumes: np.ndarray
    timers: np.ndarray
    t: int


@dataclass
class StepResult:
    observation: np.ndarray
    reward: float
    terminated: bool     # overflow: a true terminal state
    truncated: bool      # horizon reached; never set together with terminated
    info: dict = field(default_factory=dict)


class EpisodeOver(RuntimeError):
    """Raised when stepping an episode that already terminated or truncated."""


def observe(state: State) -> np.ndarray:
    """Flat observation vector [v_1..v_n, p_1..p_m]."""
    return np.concatenate((state.volumes, state.timers))


class ContainerEnv:
    """One environment instance: single-threaded, deterministic by seed.

    Instances are independent; any number may run in parallel on separate
    threads. ``backend`` picks the state-update kernel explicitly
    ("numba"/"numpy"); by default the CONTAINER_SIM_BACKEND selection
    applies.
    """

    def __init__(self, cfg: EnvConfig, backend: str | None = None):
        self.cfg = cfg
        self.n = cfg.n
        self.m = cfg.pu_count
        delta = cfg.timestep_seconds
        self._delta = delta
        self._alpha_step = np.array([p.fill_rate * delta for p in cfg.containers])
        self._sigma_step = np.array([p.noise_std_per_sec * math.sqrt(delta) for p in cfg.containers])
        self._actuation = np.array([p.actuation_time for p in cfg.containers])
        self._per_product = np.array([p.time_per_product for p in cfg.containers])
        self._product_size = np.array([p.product_size for p in cfg.containers])
        self._kernel = _kernels.step_impl(backend)
        self._rng: Optional[np.random.Generator] = None
        self._volumes: Optional[np.ndarray] = None
        self._timers: Optional[np.ndarray] = None
        self._t = 0
        self._done = False

    @property
    def state(self) -> State:
        if self._volumes is None:
            raise RuntimeError("reset() must be called first")
        return State(self._volumes.copy(), self._timers.copy(), self._t)

    def reset(self, seed: int) -> tuple[State, np.ndarray]:
        """Start a fresh episode from the seeded initial distribution.

        Initial volumes are Uniform[lo, hi], drawn in container order from
        the new PCG64 stream; all PU timers start free (0).
        """
        lo, hi = self.cfg.initial_volume_range
        self._rng = np.random.default_rng(seed)
        self._volumes = self._rng.uniform(lo, hi, self.n)
        self._timers = np.zeros(self.m)
        self._t = 0
        self._done = False
        state = self.state
        return state, observe(state)

    def step(self, action: int) -> StepResult:
        """Advance one timestep. Stepping a finished episode is an error."""
        if self._volumes is None:
            raise RuntimeError("reset() must be called before step()")
        if self._done:
            raise EpisodeOver("episode already terminated or truncated; call reset()")
        if isinstance(action, bool) or not isinstance(action, (int, np.integer)):
            raise ValueError(f"action must be an integer in 0..{self.n} (got {action!r})")
        action = int(action)
        if not 0 <= action <= self.n:
            raise ValueError(f"action {action} out of range 0..{self.n}")

        prev = State(self._volumes, self._timers, self._t)
        eps = self._rng.standard_normal(self.n) * self._sigma_step
        new_v, new_p, free_pu, assigned_pu, emptied = self._kernel(
            self._volumes, self._timers, eps, self._alpha_step, self._delta,
            action, self._actuation, self._per_product, self._product_size)

        pu_available = free_pu >= 0
        emptied_volume = float(emptied) if assigned_pu >= 0 else None
        t_next = self._t + 1
        nxt = State(new_v, new_p, t_next)

        r = transition_reward(prev, action, nxt, self.cfg, pu_available, emptied_volume)
        terminated = bool((new_v >= self.cfg.max_volume).any())
        truncated = (not terminated) and t_next >= self.cfg.max_episode_steps

        self._volumes = new_v
        self._timers = new_p
        self._t = t_next
        self._done = terminated or truncated
        info = {
            "pu_available": pu_available,
            "emptied_volume": emptied_volume,
            "pu_index": int(assigned_pu) if assigned_pu >= 0 else None,
        }
        return StepResult(observe(nxt), r, terminated, truncated, info)

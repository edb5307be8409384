"""Episode running, trajectory records, summary stats, ECDFs, trace export.

A trajectory stores one record per transition: the state the action was
taken in, the action, the resulting reward and the end-of-episode flags.
Everything needed for the analysis tools (emptying events, ECDFs of
emptying volumes and per-action rewards, per-step plot data) derives from
these records.

Trace CSV format (External Interface): UTF-8, '\\n' newlines, '.' decimal
separator, header ``t,v_1..v_n,p_1..p_m,action,reward,terminated,truncated``,
floats printed with 17 significant digits so a re-imported trace is
bit-identical. Booleans are written as 0/1.
"""

from __future__ import annotations

import bisect
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, IO, Iterable, Optional, Sequence

import numpy as np

from .config import EnvConfig, fingerprint, with_max_episode_steps
from .env import ContainerEnv, State

__all__ = [
    "StepRecord", "Trajectory", "EmptyingEvent", "EpisodeStats", "Summary", "Ecdf",
    "run_episode", "run_episodes", "episode_stats", "summarize", "ecdf",
    "emptying_events", "export_trace", "read_trace", "trace_filename",
]


@dataclass(frozen=True)
class StepRecord:
    """One transition: state at time t, the action taken there, its outcome."""

    t: int
    volumes: tuple[float, ...]
    timers: tuple[float, ...]
    action: int
    reward: float
    terminated: bool
    truncated: bool
    pu_available: bool
    emptied_volume: Optional[float]


@dataclass(frozen=True)
class Trajectory:
    """Per-step records plus provenance metadata.

    ``seed`` and ``config_fingerprint`` are provenance only and excluded
    from equality: the CSV trace format carries no metadata columns, yet an
    export/import round trip must compare equal.
    """

    records: tuple[StepRecord, ...]
    seed: Optional[int] = field(default=None, compare=False)
    config_fingerprint: str = field(default="", compare=False)

    @property
    def cumulative_reward(self) -> float:
        return sum(r.reward for r in self.records)

    @property
    def n(self) -> int:
        return len(self.records[0].volumes)

    @property
    def m(self) -> int:
        return len(self.records[0].timers)


@dataclass(frozen=True)
class EmptyingEvent:
    """One emptying attempt: recorded iff the action was not do-nothing."""

    container: int            # 1-based, equals the action value
    t: int
    volume: float             # volume of the selected container at the attempt
    reward: float
    pu_available: bool


@dataclass(frozen=True)
class EpisodeStats:
    cumulative_reward: float
    steps: int
    overflow: bool
    emptying_action_fraction: float


@dataclass(frozen=True)
class Summary:
    mean_cumulative_reward: float
    std_cumulative_reward: float
    episodes: tuple[EpisodeStats, ...]


@dataclass(frozen=True)
class Ecdf:
    """Empirical CDF on the sorted unique sample values."""

    values: tuple[float, ...]
    fractions: tuple[float, ...]

    def at(self, x: float) -> float:
        """Fraction of samples <= x."""
        i = bisect.bisect_right(self.values, x)
        return self.fractions[i - 1] if i else 0.0


def run_episode(cfg: EnvConfig, policy: Callable[[State], int], seed: int,
                max_steps: Optional[int] = None, backend: Optional[str] = None) -> Trajectory:
    """Roll out one episode (reset, then step until terminated or truncated)."""
    if max_steps is not None:
        cfg = with_max_episode_steps(cfg, max_steps)
    env = ContainerEnv(cfg, backend=backend)
    state, _ = env.reset(seed)
    records = []
    while True:
        action = policy(state)
        res = env.step(action)
        records.append(StepRecord(
            t=state.t,
            volumes=tuple(float(v) for v in state.volumes),
            timers=tuple(float(p) for p in state.timers),
            action=int(action),
            reward=float(res.reward),
            terminated=res.terminated,
            truncated=res.truncated,
            pu_available=res.info["pu_available"],
            emptied_volume=res.info["emptied_volume"],
        ))
        if res.terminated or res.truncated:
            break
        state = env.state
    return Trajectory(records=tuple(records), seed=seed, config_fingerprint=fingerprint(cfg))


def run_episodes(cfg: EnvConfig, policy_factory: Callable[[int], Callable[[State], int]],
                 seeds: Sequence[int], max_steps: Optional[int] = None,
                 jobs: int = 1) -> list[Trajectory]:
    """Run independent episodes (optionally in parallel); order follows ``seeds``.

    ``policy_factory(seed)`` builds a fresh policy per episode so stochastic
    policies stay reproducible episode by episode. Results are independent
    of ``jobs``.
    """
    def one(seed: int) -> Trajectory:
        return run_episode(cfg, policy_factory(seed), seed, max_steps=max_steps)

    if jobs <= 1:
        return [one(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, seeds))


def episode_stats(traj: Trajectory) -> EpisodeStats:
    steps = len(traj.records)
    emptying = sum(1 for r in traj.records if r.action != 0)
    return EpisodeStats(
        cumulative_reward=traj.cumulative_reward,
        steps=steps,
        overflow=traj.records[-1].terminated,
        emptying_action_fraction=emptying / steps,
    )


def summarize(trajs: Sequence[Trajectory]) -> Summary:
    """Mean and sample standard deviation (n-1) of cumulative rewards.

    With a single episode the standard deviation is reported as 0.
    """
    if not trajs:
        raise ValueError("summarize() needs at least one trajectory")
    rewards = [t.cumulative_reward for t in trajs]
    mean = sum(rewards) / len(rewards)
    if len(rewards) > 1:
        std = float(np.std(rewards, ddof=1))
    else:
        std = 0.0
    return Summary(mean, std, tuple(episode_stats(t) for t in trajs))


def ecdf(samples: Sequence[float]) -> Ecdf:
    """F(x) = #{s <= x} / N on the sorted unique sample values."""
    if len(samples) == 0:
        raise ValueError("ecdf() needs at least one sample")
    xs = np.sort(np.asarray(samples, dtype=float))
    values, counts = np.unique(xs, return_counts=True)
    fractions = np.cumsum(counts) / len(xs)
    return Ecdf(tuple(float(v) for v in values), tuple(float(f) for f in fractions))


def emptying_events(trajs: Iterable[Trajectory], container: Optional[int] = None,
                    successful_only: bool = False) -> list[EmptyingEvent]:
    """Extract emptying attempts from trajectories.

    Unfiltered events are the per-action reward population (including
    penalty attempts); ``successful_only`` keeps attempts that found a free
    PU and a non-empty container, i.e. the emptying-volume population.
    """
    events = []
    for traj in trajs:
        for rec in traj.records:
            if rec.action == 0:
                continue
            volume = rec.volumes[rec.action - 1]
            if container is not None and rec.action != container:
                continue
            if successful_only and not (rec.pu_available and volume > 0):
                continue
            events.append(EmptyingEvent(
                container=rec.action, t=rec.t, volume=volume,
                reward=rec.reward, pu_available=rec.pu_available))
    return events


# ---------------------------------------------------------------------------
# trace CSV

def trace_filename(seed: int) -> str:
    return f"trace_seed{seed}.csv"


def _fmt(x: float) -> str:
    return format(x, ".17g")


def export_trace(traj: Trajectory, dest: str | Path | IO[str]) -> None:
    """Write the trajectory as CSV; identical trajectories give identical bytes."""
    n, m = traj.n, traj.m
    header = ",".join(
        ["t"] + [f"v_{i}" for i in range(1, n + 1)]
        + [f"p_{j}" for j in range(1, m + 1)]
        + ["action", "reward", "terminated", "truncated"])
    lines = [header]
    for r in traj.records:
        lines.append(",".join(
            [str(r.t)] + [_fmt(v) for v in r.volumes] + [_fmt(p) for p in r.timers]
            + [str(r.action), _fmt(r.reward),
               str(int(r.terminated)), str(int(r.truncated))]))
    text = "\n".join(lines) + "\n"
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        dest.write(text)


def read_trace(src: str | Path | IO[str]) -> Trajectory:
    """Parse an exported trace back into an equal Trajectory.

    ``pu_available`` and ``emptied_volume`` are reconstructed from the rows:
    a PU was available iff some recorded timer is 0, and a volume was sent
    to a PU iff the action was an emptying action while a PU was available.
    """
    if isinstance(src, (str, Path)):
        with open(src, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    else:
        lines = src.read().splitlines()
    if not lines:
        raise ValueError("empty trace file")
    header = lines[0].split(",")
    n = sum(1 for h in header if h.startswith("v_"))
    m = sum(1 for h in header if h.startswith("p_"))
    expected = ["t"] + [f"v_{i}" for i in range(1, n + 1)] \
        + [f"p_{j}" for j in range(1, m + 1)] + ["action", "reward", "terminated", "truncated"]
    if header != expected or n == 0:
        raise ValueError(f"unexpected trace header: {lines[0]!r}")
    records = []
    for line in lines[1:]:
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise ValueError(f"malformed trace row: {line!r}")
        t = int(cells[0])
        volumes = tuple(float(c) for c in cells[1:1 + n])
        timers = tuple(float(c) for c in cells[1 + n:1 + n + m])
        action = int(cells[1 + n + m])
        reward = float(cells[2 + n + m])
        terminated = cells[3 + n + m] == "1"
        truncated = cells[4 + n + m] == "1"
        pu_available = any(p == 0.0 for p in timers)
        emptied = volumes[action - 1] if (action > 0 and pu_available) else None
        records.append(StepRecord(t, volumes, timers, action, reward,
                                  terminated, truncated, pu_available, emptied))
    return Trajectory(records=tuple(records))

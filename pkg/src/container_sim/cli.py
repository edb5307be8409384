"""Command-line interface: validate / rollout / analyze / benchmark / serve.

Exit codes: 0 success, 1 validation or usage error, 2 runtime error.
Every subcommand is deterministic given its flags and seeds; multi-episode
runs use seeds ``seed, seed+1, ...`` so any single episode can be
reproduced in isolation. All outputs go under ``--out-dir``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import (ConfigError, EnvConfig, default_config, fingerprint,
                     load_config, timestep_warnings, validate_reward_landscape)
from .policies import POLICY_NAMES, make_policy
from .protocol import serve
from .rollout import (Trajectory, ecdf, emptying_events, export_trace,
                      read_trace, run_episodes, summarize, trace_filename)

__all__ = ["main"]


def _policy_factory(name: str, cfg: EnvConfig, threshold: float):
    """Fresh policy per episode; stochastic policies get a seed-derived stream
    (independent of the environment stream for the same seed)."""
    def factory(seed: int):
        rng = np.random.default_rng((seed, 1)) if name == "random" else None
        return make_policy(name, cfg, threshold=threshold, rng=rng)
    return factory


def _fmt17(x: float) -> str:
    return format(x, ".17g")


# ---------------------------------------------------------------------------
# subcommands

def _cmd_validate(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 1
    warnings = validate_reward_landscape(cfg, args.grid_step) + timestep_warnings(cfg)
    print(f"valid: {args.config} (n={cfg.n}, m={cfg.m}, delta={cfg.timestep_seconds:g}, "
          f"fingerprint {fingerprint(cfg)})")
    for w in warnings:
        print(f"warning: {w}")
    return 0


def _cmd_rollout(args) -> int:
    cfg = load_config(args.config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seeds = list(range(args.seed, args.seed + args.episodes))
    trajs = run_episodes(cfg, _policy_factory(args.policy, cfg, args.threshold),
                         seeds, max_steps=args.max_steps, jobs=args.jobs)
    for traj in trajs:
        export_trace(traj, out_dir / trace_filename(traj.seed))
    summary = summarize(trajs)
    doc = {
        "config_fingerprint": trajs[0].config_fingerprint,
        "policy": args.policy,
        "threshold": args.threshold if args.policy == "rule-based" else None,
        "episodes": args.episodes,
        "seeds": seeds,
        "max_steps": args.max_steps,
        "mean_cumulative_reward": summary.mean_cumulative_reward,
        "std_cumulative_reward": summary.std_cumulative_reward,
        "per_episode": [
            {
                "seed": seed,
                "cumulative_reward": ep.cumulative_reward,
                "steps": ep.steps,
                "overflow": ep.overflow,
                "emptying_action_fraction": ep.emptying_action_fraction,
            }
            for seed, ep in zip(seeds, summary.episodes)
        ],
    }
    (out_dir / "summary.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print(f"cumulative reward: {summary.mean_cumulative_reward:.4f} "
          f"± {summary.std_cumulative_reward:.4f} over {args.episodes} episode(s)")
    return 0


def _write_ecdf_csv(path: Path, samples: Sequence[float]) -> None:
    lines = ["value,cumulative_fraction"]
    if samples:
        table = ecdf(samples)
        lines += [f"{_fmt17(v)},{_fmt17(f)}" for v, f in zip(table.values, table.fractions)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _cmd_analyze(args) -> int:
    traces_dir = Path(args.traces)
    paths = sorted(traces_dir.glob("trace_*.csv"))
    if not paths:
        print(f"no trace files under {traces_dir}", file=sys.stderr)
        return 1
    trajs = [read_trace(p) for p in paths]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.mode in ("ecdf-volumes", "ecdf-rewards"):
        successful = args.mode == "ecdf-volumes"
        value = (lambda e: e.volume) if successful else (lambda e: e.reward)
        stem = "ecdf_volumes" if successful else "ecdf_rewards"
        groups: dict[str, list[float]]
        if args.per_container:
            n = trajs[0].n
            groups = {f"{stem}_c{i}": [] for i in range(1, n + 1)}
            for e in emptying_events(trajs, successful_only=successful):
                groups[f"{stem}_c{e.container}"].append(value(e))
        else:
            groups = {stem: [value(e) for e in emptying_events(trajs, successful_only=successful)]}
        for name, samples in groups.items():
            if not samples:
                print(f"warning: no emptying events for {name}; writing empty table",
                      file=sys.stderr)
            _write_ecdf_csv(out_dir / f"{name}.csv", samples)
        return 0

    if args.mode == "trace-plot-data":
        for path, traj in zip(paths, trajs):
            _write_plot_data(out_dir, path.stem, traj)
        return 0

    raise ValueError(f"unknown mode {args.mode!r}")


def _write_plot_data(out_dir: Path, stem: str, traj: Trajectory) -> None:
    """Per-step panels: all volumes, emptying actions, non-zero rewards."""
    n = traj.n
    vol_lines = ["t," + ",".join(f"v_{i}" for i in range(1, n + 1))]
    act_lines = ["t,action"]
    rew_lines = ["t,reward"]
    for r in traj.records:
        vol_lines.append(",".join([str(r.t)] + [_fmt17(v) for v in r.volumes]))
        if r.action != 0:
            act_lines.append(f"{r.t},{r.action}")
        if r.reward != 0.0:
            rew_lines.append(f"{r.t},{_fmt17(r.reward)}")
    (out_dir / f"{stem}_volumes.csv").write_text("\n".join(vol_lines) + "\n", encoding="utf-8")
    (out_dir / f"{stem}_actions.csv").write_text("\n".join(act_lines) + "\n", encoding="utf-8")
    (out_dir / f"{stem}_rewards.csv").write_text("\n".join(rew_lines) + "\n", encoding="utf-8")


def _parse_grid_point(text: str) -> tuple[int, int, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError(f"grid point must be 'n,m,delta' (got {text!r})")
    try:
        return int(parts[0]), int(parts[1]), float(parts[2])
    except ValueError as exc:
        raise ConfigError(f"grid point must be 'n,m,delta' (got {text!r})") from exc


def _cmd_benchmark(args) -> int:
    points = [_parse_grid_point(g) for g in args.grid]
    seeds = list(range(args.seed, args.seed + args.episodes))
    col = 24
    header = "config".ljust(12) + "".join(p.ljust(col) for p in POLICY_NAMES)
    print(header)
    for n, m, delta in points:
        cfg = default_config(n, m, delta)
        row = f"{n}-{m}-{int(delta)}".ljust(12)
        for policy in POLICY_NAMES:
            trajs = run_episodes(cfg, _policy_factory(policy, cfg, args.threshold),
                                 seeds, max_steps=args.max_steps, jobs=args.jobs)
            s = summarize(trajs)
            row += f"{s.mean_cumulative_reward:.2f} ± {s.std_cumulative_reward:.2f}".ljust(col)
        print(row)
    return 0


def _cmd_serve(args) -> int:
    cfg = load_config(args.config)
    serve(cfg, transport=args.transport, host=args.host, port=args.port)
    return 0


# ---------------------------------------------------------------------------
# parser

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="container-sim",
        description="Container-management resource-allocation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a config file and report warnings")
    p.add_argument("--config", required=True, help="path to a config JSON file")
    p.add_argument("--grid-step", type=float, default=0.01,
                   help="volume grid step for the reward-landscape scan")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("rollout", help="run episodes and export traces + summary")
    p.add_argument("--config", required=True)
    p.add_argument("--policy", choices=POLICY_NAMES, required=True)
    p.add_argument("--threshold", type=float, default=1.0,
                   help="rule-based firing distance from the ideal volume")
    p.add_argument("--episodes", type=int, default=1)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--max-steps", type=int, default=None,
                   help="override the config episode horizon")
    p.add_argument("--jobs", type=int, default=1, help="parallel episodes")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_rollout)

    p = sub.add_parser("analyze", help="derive ECDF tables / plot data from traces")
    p.add_argument("--traces", required=True, help="directory containing trace_*.csv")
    p.add_argument("--mode", choices=("ecdf-volumes", "ecdf-rewards", "trace-plot-data"),
                   required=True)
    p.add_argument("--per-container", action="store_true",
                   help="one output table per container instead of pooled")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("benchmark", help="built-in policies across config grid points")
    p.add_argument("--grid", action="append", required=True, metavar="N,M,DELTA",
                   help="grid point, repeatable (e.g. --grid 5,2,120)")
    p.add_argument("--episodes", type=int, default=15)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--threshold", type=float, default=1.0)
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_benchmark)

    p = sub.add_parser("serve", help="serve the JSON-lines environment protocol")
    p.add_argument("--config", required=True)
    p.add_argument("--transport", choices=("stdio", "tcp"), default="stdio")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=0)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help, 2 for usage errors; usage maps to 1
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 2
    except OSError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

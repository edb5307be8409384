"""Train/evaluate script: PPO policies per seed, Table-style report.

Trains one policy per seed on the given config, evaluates each trained
policy deterministically on the evaluation environment (same instance at
the test horizon, 600 steps by default), and writes saved policies plus a
report with best/median columns and a uniform-random baseline.

    container-sim-train --config configs/synthetic-5-2-120.json \
        --total-steps 100000 --seeds 1,2,3 --out-dir runs/ppo-5-2-120
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import torch

from .client import RemoteEnv, observation_scale, write_config_override
from .ppo import PPOConfig, PolicyValueNet, evaluate_policy, random_baseline, train_ppo

__all__ = ["main", "train_and_evaluate"]


def train_and_evaluate(config: str | Path, out_dir: str | Path,
                       total_steps: int = 100_000, n_steps: int = 6144,
                       seeds: tuple[int, ...] = (1, 2, 3),
                       eval_config: str | Path | None = None,
                       eval_max_steps: int = 600,
                       eval_episodes: int = 15) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    eval_source = Path(eval_config) if eval_config is not None else Path(config)
    eval_path = write_config_override(eval_source, out / "eval-config.json",
                                      max_episode_steps=eval_max_steps)
    eval_seeds = list(range(1, eval_episodes + 1))
    obs_scale = observation_scale(config)
    ppo_cfg = PPOConfig(total_steps=total_steps, n_steps=n_steps)

    per_seed = []
    for seed in seeds:
        with RemoteEnv(config) as env:
            net, history = train_ppo(env, obs_scale, ppo_cfg, seed)
        torch.save(net.state_dict(), out / f"policy_seed{seed}.pt")
        with RemoteEnv(eval_path) as eval_env:
            returns = evaluate_policy(eval_env, net.action_fn(deterministic=True),
                                      eval_seeds)
        per_seed.append({
            "seed": seed,
            "eval_mean": float(returns.mean()),
            "eval_std": float(returns.std(ddof=1)) if len(returns) > 1 else 0.0,
            "train_episodes": len(history),
            "train_return_last10": float(np.mean(history[-10:])) if history else None,
        })
        print(f"seed {seed}: eval {per_seed[-1]['eval_mean']:.2f} "
              f"± {per_seed[-1]['eval_std']:.2f} over {eval_episodes} episodes",
              flush=True)

    with RemoteEnv(eval_path) as eval_env:
        baseline = random_baseline(eval_env, eval_seeds)

    ranked = sorted(per_seed, key=lambda r: r["eval_mean"])
    best = ranked[-1]
    median = ranked[(len(ranked) - 1) // 2]
    report = {
        "config": str(config),
        "eval_config": str(eval_path),
        "eval_max_steps": eval_max_steps,
        "eval_episodes": eval_episodes,
        "algo": "ppo",
        "total_steps": total_steps,
        "n_steps": n_steps,
        "seeds": list(seeds),
        "per_seed": per_seed,
        "best": {"seed": best["seed"], "mean": best["eval_mean"], "std": best["eval_std"]},
        "median": {"seed": median["seed"], "mean": median["eval_mean"],
                   "std": median["eval_std"]},
        "random_baseline": {
            "mean": float(baseline.mean()),
            "std": float(baseline.std(ddof=1)) if len(baseline) > 1 else 0.0,
        },
    }
    (out / "report.json").write_text(json.dumps(report, indent=2) + "\n",
                                     encoding="utf-8")
    print(f"ppo best {report['best']['mean']:.2f} ± {report['best']['std']:.2f} | "
          f"median {report['median']['mean']:.2f} ± {report['median']['std']:.2f} | "
          f"random {report['random_baseline']['mean']:.2f} "
          f"± {report['random_baseline']['std']:.2f}")
    return report


def load_policy(path: str | Path, obs_len: int, action_count: int,
                obs_scale: np.ndarray) -> PolicyValueNet:
    net = PolicyValueNet(obs_len, action_count, obs_scale)
    net.load_state_dict(torch.load(path, weights_only=True))
    net.eval()
    return net


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="container-sim-train", description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--config", default=None, help="training config JSON")
    parser.add_argument("--n", type=int, default=None, help="container count "
                        "(with --m/--delta, picks the shipped synthetic config)")
    parser.add_argument("--m", type=int, default=None, help="PU count")
    parser.add_argument("--delta", type=int, default=None, help="timestep seconds")
    parser.add_argument("--configs-dir", default="configs",
                        help="where the shipped synthetic-<n>-<m>-<delta>.json live")
    parser.add_argument("--algo", choices=("ppo",), default="ppo")
    parser.add_argument("--total-timesteps", type=int, default=100_000)
    parser.add_argument("--n-steps", type=int, default=6144,
                        help="transitions per policy update")
    parser.add_argument("--seeds", default="1,2,3",
                        help="comma-separated training seeds")
    parser.add_argument("--eval-config", default=None,
                        help="evaluation config (default: the training config)")
    parser.add_argument("--eval-max-steps", type=int, default=600)
    parser.add_argument("--eval-episodes", type=int, default=15)
    parser.add_argument("--out-dir", required=True)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    if args.config is not None:
        config = Path(args.config)
    elif None not in (args.n, args.m, args.delta):
        config = Path(args.configs_dir) / f"synthetic-{args.n}-{args.m}-{args.delta}.json"
    else:
        print("error: pass --config or all of --n/--m/--delta", file=sys.stderr)
        return 1
    if not config.exists():
        print(f"error: no such config {config}", file=sys.stderr)
        return 1
    seeds = tuple(int(s) for s in args.seeds.split(",") if s)
    if not seeds:
        print("error: --seeds must name at least one seed", file=sys.stderr)
        return 1
    train_and_evaluate(config, args.out_dir, total_steps=args.total_timesteps,
                       n_steps=args.n_steps, seeds=seeds,
                       eval_config=args.eval_config,
                       eval_max_steps=args.eval_max_steps,
                       eval_episodes=args.eval_episodes)
    return 0


if __name__ == "__main__":
    sys.exit(main())

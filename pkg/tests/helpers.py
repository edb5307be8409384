"""Shared test utilities: config builders and a minimal wire client."""

from __future__ import annotations

import json
import os
import subprocess
import sys
from pathlib import Path

from container_sim.config import ContainerParams, EnvConfig, Optimum

REPO_ROOT = Path(__file__).resolve().parents[1]
CONFIGS_DIR = REPO_ROOT / "configs"


def shipped_config_paths() -> list[Path]:
    return sorted(CONFIGS_DIR.glob("synthetic-*.json"))


def container(name="X", fill_rate=0.005, noise_std_per_sec=0.01, product_size=5.0,
              actuation_time=120.0, time_per_product=40.0,
              optima=((35.0, 1.0, 2.0),)) -> ContainerParams:
    return ContainerParams(
        name=name,
        fill_rate=fill_rate,
        noise_std_per_sec=noise_std_per_sec,
        product_size=product_size,
        actuation_time=actuation_time,
        time_per_product=time_per_product,
        optima=tuple(Optimum(*o) for o in optima),
    )


def env_config(containers, pu_count=1, max_volume=40.0, timestep_seconds=60.0,
               max_episode_steps=100, reward_min=-1.0, reward_penalty=-0.1,
               initial_volume_range=(0.0, 30.0)) -> EnvConfig:
    return EnvConfig(
        containers=tuple(containers),
        pu_count=pu_count,
        max_volume=max_volume,
        timestep_seconds=timestep_seconds,
        max_episode_steps=max_episode_steps,
        reward_min=reward_min,
        reward_penalty=reward_penalty,
        initial_volume_range=initial_volume_range,
    )


def single_container_cfg(**kwargs) -> EnvConfig:
    """1 container, 1 PU; container fields go through ``container()``."""
    container_keys = ("name", "fill_rate", "noise_std_per_sec", "product_size",
                      "actuation_time", "time_per_product", "optima")
    c_kwargs = {k: kwargs.pop(k) for k in list(kwargs) if k in container_keys}
    return env_config([container(**c_kwargs)], **kwargs)


class WireClient:
    """Talk to a `container-sim serve --transport stdio` subprocess."""

    def __init__(self, config_path: str | Path, env: dict | None = None):
        run_env = dict(os.environ)
        if env:
            run_env.update(env)
        self.proc = subprocess.Popen(
            [sys.executable, "-m", "container_sim", "serve",
             "--config", str(config_path), "--transport", "stdio"],
            stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            text=True, encoding="utf-8", env=run_env)

    def send(self, obj: dict) -> None:
        self.proc.stdin.write(json.dumps(obj) + "\n")

    def flush(self) -> None:
        self.proc.stdin.flush()

    def recv_line(self) -> str:
        line = self.proc.stdout.readline()
        if not line:
            raise RuntimeError("server closed the stream")
        return line

    def recv(self) -> dict:
        return json.loads(self.recv_line())

    def request(self, obj: dict) -> dict:
        self.send(obj)
        self.flush()
        return self.recv()

    def close(self) -> None:
        try:
            if self.proc.poll() is None:
                self.send({"cmd": "close"})
                self.flush()
                self.proc.stdin.close()
        except (BrokenPipeError, ValueError):
            pass
        self.proc.wait(timeout=10)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

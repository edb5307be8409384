"""Remote environment client for the container-sim JSON-lines protocol.

Talks to a ``container-sim serve`` process over stdio (spawned as a child,
the zero-config default) or over TCP, and exposes the standard RL five-tuple
step contract:

    obs                      = env.reset(seed)
    obs, r, term, trunc, info = env.step(action)

Observations are float64 vectors of length n+m (volumes then PU timers);
actions are integers in 0..n. The client consumes the simulator strictly
through its external interfaces: the CLI entry point, the wire protocol and
the JSON config format.
"""

from __future__ import annotations

import json
import math
import socket
import subprocess
import sys
from pathlib import Path
from typing import IO, Optional

import numpy as np

__all__ = ["RemoteEnv", "RemoteEnvError", "ServerError", "BadActionError",
           "EpisodeOverError", "write_config_override", "observation_scale",
           "make_gymnasium_env", "register_gymnasium_env"]


class RemoteEnvError(RuntimeError):
    """Transport-level failure (connection lost, malformed server output)."""


class ServerError(RemoteEnvError):
    """The server answered with an error message."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


class BadActionError(ServerError):
    pass


class EpisodeOverError(ServerError):
    pass


_ERROR_TYPES = {"bad_action": BadActionError, "episode_over": EpisodeOverError}


def _server_command(config_path: str | Path) -> list[str]:
    return [sys.executable, "-m", "container_sim", "serve",
            "--config", str(config_path), "--transport", "stdio"]


class RemoteEnv:
    """One protocol session; open one instance per training worker."""

    def __init__(self, config_path: str | Path, transport: str = "stdio",
                 host: str = "127.0.0.1", port: Optional[int] = None):
        self._proc: Optional[subprocess.Popen] = None
        self._sock: Optional[socket.socket] = None
        if transport == "stdio":
            self._proc = subprocess.Popen(
                _server_command(config_path),
                stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                text=True, encoding="utf-8")
            self._writer: IO[str] = self._proc.stdin
            self._reader: IO[str] = self._proc.stdout
        elif transport == "tcp":
            if port is None:
                raise ValueError("tcp transport requires a port")
            self._sock = socket.create_connection((host, port), timeout=60)
            handle = self._sock.makefile("rw", encoding="utf-8", newline="\n")
            self._writer = handle
            self._reader = handle
        else:
            raise ValueError(f"unknown transport {transport!r}")

        spec = self._request({"cmd": "hello"})["spec"]
        self.n: int = spec["n"]
        self.m: int = spec["m"]
        self.obs_len: int = spec["obs_len"]
        self.action_count: int = spec["actions"]
        self.config_fingerprint: str = spec["config_fingerprint"]

    # -- protocol plumbing --------------------------------------------------

    def _request(self, obj: dict) -> dict:
        try:
            self._writer.write(json.dumps(obj) + "\n")
            self._writer.flush()
            line = self._reader.readline()
        except (BrokenPipeError, OSError) as exc:
            raise RemoteEnvError(f"connection lost: {exc}") from exc
        if not line:
            raise RemoteEnvError("server closed the connection")
        resp = json.loads(line)
        if "error" in resp:
            err = resp["error"]
            raise _ERROR_TYPES.get(err["code"], ServerError)(err["code"], err["message"])
        return resp

    # -- five-tuple contract --------------------------------------------------

    def reset(self, seed: int) -> np.ndarray:
        tr = self._request({"cmd": "reset", "seed": int(seed)})["transition"]
        return np.asarray(tr["observation"], dtype=np.float64)

    def step(self, action: int) -> tuple[np.ndarray, float, bool, bool, dict]:
        tr = self._request({"cmd": "step", "action": int(action)})["transition"]
        return (np.asarray(tr["observation"], dtype=np.float64),
                float(tr["reward"]), bool(tr["terminated"]),
                bool(tr["truncated"]), tr["info"])

    def close(self) -> None:
        try:
            self._writer.write(json.dumps({"cmd": "close"}) + "\n")
            self._writer.flush()
        except (BrokenPipeError, OSError, ValueError):
            pass
        if self._proc is not None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            self._proc.wait(timeout=10)
            self._proc = None
        if self._sock is not None:
            self._sock.close()
            self._sock = None

    def __enter__(self) -> "RemoteEnv":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


# ---------------------------------------------------------------------------
# config-file helpers (documented JSON format only)

def write_config_override(config_path: str | Path, out_path: str | Path,
                          **fields) -> Path:
    """Copy a config file with top-level fields replaced (e.g. the horizon
    ``max_episode_steps=600`` for test-time evaluation)."""
    doc = json.loads(Path(config_path).read_text(encoding="utf-8"))
    doc.update(fields)
    out = Path(out_path)
    out.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return out


def observation_scale(config_path: str | Path) -> np.ndarray:
    """Fixed per-component normalization for observations.

    Volumes are scaled by 1/max_volume; PU timers by the longest possible
    job, actuation + per-product time * floor(max_volume / product_size).
    """
    doc = json.loads(Path(config_path).read_text(encoding="utf-8"))
    v_max = float(doc["max_volume"])
    g_max = max(
        c["actuation_time"] + c["time_per_product"] * math.floor(v_max / c["product_size"])
        for c in doc["containers"])
    n = len(doc["containers"])
    m = int(doc["pu_count"])
    return np.concatenate([np.full(n, 1.0 / v_max), np.full(m, 1.0 / g_max)])


# ---------------------------------------------------------------------------
# optional gymnasium integration

def make_gymnasium_env(config_path: str | Path, **kwargs):
    """Gymnasium-API wrapper around :class:`RemoteEnv` (requires gymnasium)."""
    import gymnasium
    from gymnasium import spaces

    class RemoteGymEnv(gymnasium.Env):
        metadata = {"render_modes": []}

        def __init__(self):
            super().__init__()
            self._env = RemoteEnv(config_path, **kwargs)
            self.observation_space = spaces.Box(
                low=0.0, high=np.inf, shape=(self._env.obs_len,), dtype=np.float64)
            self.action_space = spaces.Discrete(self._env.action_count)
            self._episode = 0

        def reset(self, *, seed=None, options=None):
            if seed is None:
                self._episode += 1
                seed = self._episode
            return self._env.reset(seed), {}

        def step(self, action):
            return self._env.step(int(action))

        def close(self):
            self._env.close()

    return RemoteGymEnv()


def register_gymnasium_env(env_id: str = "ContainerSimRemote-v0") -> None:
    """Register the wrapper under ``env_id`` (requires gymnasium)."""
    import gymnasium

    gymnasium.register(
        id=env_id,
        entry_point="container_sim_adapter.client:make_gymnasium_env",
    )

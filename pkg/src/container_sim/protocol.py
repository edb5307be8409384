"""JSON-lines environment server (stdio or TCP) for external agents.

One UTF-8 JSON object per '\\n'-terminated line. Requests:

    {"cmd": "hello"}
    {"cmd": "reset", "seed": <uint64>}
    {"cmd": "step", "action": <int 0..n>}
    {"cmd": "close"}

Responses (exactly one per request, in request order):

    {"spec": {"n", "m", "obs_len", "actions", "config_fingerprint"}}
    {"transition": {"observation", "reward", "terminated", "truncated", "info"}}
    {"ack": true}
    {"error": {"code", "message"}}

``reset`` answers with a transition whose reward is null. Error codes:
``bad_json`` (malformed line, unknown command, bad seed), ``bad_action``,
``not_reset`` (step before the first reset), ``episode_over`` (step after
a terminal/truncated step without reset). All errors are recoverable: the
session stays usable. Whitespace-only lines are ignored.

Each connection gets its own environment; vectorization is achieved by
opening multiple connections. The config is shared read-only.
"""

from __future__ import annotations

import io
import json
import socketserver
import sys
from typing import IO, Optional

from .config import EnvConfig, fingerprint
from .env import ContainerEnv, EpisodeOver

__all__ = ["EnvSession", "serve", "serve_stdio", "serve_tcp", "make_tcp_server"]

_MAX_SEED = 2 ** 64


class EnvSession:
    """Protocol state machine for one connection. Not thread-safe."""

    def __init__(self, cfg: EnvConfig):
        self._env = ContainerEnv(cfg)
        self._was_reset = False
        self.spec = {
            "n": cfg.n,
            "m": cfg.m,
            "obs_len": cfg.n + cfg.m,
            "actions": cfg.n + 1,
            "config_fingerprint": fingerprint(cfg),
        }

    def handle_line(self, line: str) -> tuple[Optional[dict], bool]:
        """Response for one request line, plus a close-connection flag."""
        if not line.strip():
            return None, False
        try:
            req = json.loads(line)
        except json.JSONDecodeError as exc:
            return _error("bad_json", f"malformed JSON: {exc}"), False
        if not isinstance(req, dict):
            return _error("bad_json", "request must be a JSON object"), False
        return self.handle(req)

    def handle(self, req: dict) -> tuple[dict, bool]:
        cmd = req.get("cmd")
        if cmd == "hello":
            return {"spec": self.spec}, False
        if cmd == "reset":
            return self._reset(req), False
        if cmd == "step":
            return self._step(req), False
        if cmd == "close":
            return {"ack": True}, True
        return _error("bad_json", f"unknown command {cmd!r}"), False

    def _reset(self, req: dict) -> dict:
        seed = req.get("seed")
        if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < _MAX_SEED:
            return _error("bad_json", "reset requires an unsigned 64-bit integer 'seed'")
        _, obs = self._env.reset(seed)
        self._was_reset = True
        return _transition(obs, None, False, False, {})

    def _step(self, req: dict) -> dict:
        if not self._was_reset:
            return _error("not_reset", "step before the first reset")
        action = req.get("action")
        if isinstance(action, bool) or not isinstance(action, int):
            return _error("bad_action", "step requires an integer 'action'")
        try:
            res = self._env.step(action)
        except EpisodeOver:
            return _error("episode_over", "episode is over; send reset first")
        except ValueError as exc:
            return _error("bad_action", str(exc))
        return _transition(res.observation, res.reward, res.terminated,
                           res.truncated, res.info)


def _error(code: str, message: str) -> dict:
    return {"error": {"code": code, "message": message}}


def _transition(observation, reward, terminated, truncated, info) -> dict:
    return {"transition": {
        "observation": [float(x) for x in observation],
        "reward": None if reward is None else float(reward),
        "terminated": bool(terminated),
        "truncated": bool(truncated),
        "info": info,
    }}


def _session_loop(cfg: EnvConfig, rfile: IO[str], wfile: IO[str]) -> None:
    session = EnvSession(cfg)
    for line in rfile:
        resp, closing = session.handle_line(line)
        if resp is not None:
            wfile.write(json.dumps(resp, separators=(",", ":")) + "\n")
            wfile.flush()
        if closing:
            break


def serve_stdio(cfg: EnvConfig, rfile: Optional[IO[str]] = None,
                wfile: Optional[IO[str]] = None) -> None:
    """Serve a single session on stdin/stdout until close or EOF."""
    _session_loop(cfg, rfile if rfile is not None else sys.stdin,
                  wfile if wfile is not None else sys.stdout)


def make_tcp_server(cfg: EnvConfig, host: str = "127.0.0.1",
                    port: int = 0) -> socketserver.ThreadingTCPServer:
    """TCP server with one session (and one thread) per connection."""

    class Handler(socketserver.StreamRequestHandler):
        def handle(self) -> None:
            reader = io.TextIOWrapper(self.rfile, encoding="utf-8", newline="\n")
            writer = io.TextIOWrapper(self.wfile, encoding="utf-8", newline="\n")
            try:
                _session_loop(cfg, reader, writer)
            except (BrokenPipeError, ConnectionResetError):
                pass

    class Server(socketserver.ThreadingTCPServer):
        allow_reuse_address = True
        daemon_threads = True

    return Server((host, port), Handler)


def serve_tcp(cfg: EnvConfig, host: str = "127.0.0.1", port: int = 0) -> None:
    with make_tcp_server(cfg, host, port) as server:
        print(f"serving on {server.server_address[0]}:{server.server_address[1]}",
              file=sys.stderr, flush=True)
        server.serve_forever()


def serve(cfg: EnvConfig, transport: str = "stdio", host: str = "127.0.0.1",
          port: int = 0) -> None:
    if transport == "stdio":
        serve_stdio(cfg)
    elif transport == "tcp":
        serve_tcp(cfg, host, port)
    else:
        raise ValueError(f"unknown transport {transport!r}; choose stdio or tcp")

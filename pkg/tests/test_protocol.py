import json
import socket
import threading

import pytest

from container_sim.config import load_config
from container_sim.env import ContainerEnv
from container_sim.protocol import EnvSession, make_tcp_server
from helpers import CONFIGS_DIR, WireClient, single_container_cfg

CFG_5_2 = load_config(CONFIGS_DIR / "synthetic-5-2-60.json")


def test_hello_spec_message():
    resp, closing = EnvSession(CFG_5_2).handle({"cmd": "hello"})
    assert not closing
    spec = resp["spec"]
    assert spec["n"] == 5 and spec["m"] == 2
    assert spec["obs_len"] == 7
    assert spec["actions"] == 6
    assert isinstance(spec["config_fingerprint"], str)


def test_step_before_reset():
    resp, _ = EnvSession(CFG_5_2).handle({"cmd": "step", "action": 0})
    assert resp["error"]["code"] == "not_reset"


def test_bad_action_out_of_range_and_bad_types():
    session = EnvSession(CFG_5_2)
    session.handle({"cmd": "reset", "seed": 1})
    for action in (7, -1):
        resp, _ = session.handle({"cmd": "step", "action": action})
        assert resp["error"]["code"] == "bad_action"
    for action in ("1", 1.5, True, None):
        resp, _ = session.handle({"cmd": "step", "action": action})
        assert resp["error"]["code"] == "bad_action"
    # session still usable after recoverable errors
    resp, _ = session.handle({"cmd": "step", "action": 0})
    assert "transition" in resp


def test_reset_seed_validation():
    session = EnvSession(CFG_5_2)
    for req in ({"cmd": "reset"}, {"cmd": "reset", "seed": -1},
                {"cmd": "reset", "seed": 2 ** 64}, {"cmd": "reset", "seed": True},
                {"cmd": "reset", "seed": 1.5}):
        resp, _ = session.handle(req)
        assert resp["error"]["code"] == "bad_json"


def test_reset_transition_shape():
    session = EnvSession(CFG_5_2)
    resp, _ = session.handle({"cmd": "reset", "seed": 42})
    tr = resp["transition"]
    assert tr["reward"] is None
    assert tr["terminated"] is False and tr["truncated"] is False
    assert len(tr["observation"]) == 7
    assert tr["info"] == {}


def test_episode_over_error_and_recovery():
    cfg = single_container_cfg(fill_rate=1.0 / 60, noise_std_per_sec=0.0,
                               initial_volume_range=(39.5, 39.5),
                               max_episode_steps=10)
    session = EnvSession(cfg)
    session.handle({"cmd": "reset", "seed": 1})
    resp, _ = session.handle({"cmd": "step", "action": 0})
    assert resp["transition"]["terminated"] is True
    resp, _ = session.handle({"cmd": "step", "action": 0})
    assert resp["error"]["code"] == "episode_over"
    resp, _ = session.handle({"cmd": "reset", "seed": 2})
    assert "transition" in resp


def test_bad_json_and_unknown_command():
    session = EnvSession(CFG_5_2)
    resp, _ = session.handle_line("{oops\n")
    assert resp["error"]["code"] == "bad_json"
    resp, _ = session.handle_line('"just a string"\n')
    assert resp["error"]["code"] == "bad_json"
    resp, _ = session.handle({"cmd": "frobnicate"})
    assert resp["error"]["code"] == "bad_json"
    assert session.handle_line("   \n") == (None, False)


def test_close_acks_and_closes():
    resp, closing = EnvSession(CFG_5_2).handle({"cmd": "close"})
    assert resp == {"ack": True}
    assert closing


def test_wire_parity_with_in_process_env():
    env = ContainerEnv(CFG_5_2)
    env.reset(7)
    session = EnvSession(CFG_5_2)
    session.handle({"cmd": "reset", "seed": 7})
    for _ in range(100):
        res = env.step(0)
        wire, _ = session.handle({"cmd": "step", "action": 0})
        tr = json.loads(json.dumps(wire))["transition"]  # through the codec
        assert tr["observation"] == [float(x) for x in res.observation]
        assert tr["reward"] == res.reward
        assert tr["terminated"] == res.terminated
        assert tr["info"]["pu_available"] == res.info["pu_available"]
        if res.terminated or res.truncated:
            break


def test_stdio_transcript_deterministic():
    script = [{"cmd": "hello"}, {"cmd": "reset", "seed": 7}] + \
        [{"cmd": "step", "action": 0}] * 50 + [{"cmd": "close"}]
    lines = "".join(json.dumps(r) + "\n" for r in script)
    transcripts = []
    for _ in range(2):
        with WireClient(CONFIGS_DIR / "synthetic-5-2-60.json") as client:
            out, _ = client.proc.communicate(lines, timeout=60)
            transcripts.append(out)
    assert transcripts[0] == transcripts[1]
    assert len(transcripts[0].splitlines()) == len(script)


def test_tcp_sessions_are_independent():
    server = make_tcp_server(CFG_5_2, "127.0.0.1", 0)
    port = server.server_address[1]
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        def run_session(seed):
            with socket.create_connection(("127.0.0.1", port), timeout=10) as sock:
                f = sock.makefile("rw", encoding="utf-8", newline="\n")
                out = []
                for req in ({"cmd": "reset", "seed": seed},
                            {"cmd": "step", "action": 0},
                            {"cmd": "close"}):
                    f.write(json.dumps(req) + "\n")
                    f.flush()
                    out.append(json.loads(f.readline()))
                return out

        a = run_session(1)
        b = run_session(1)
        c = run_session(2)
        assert a == b
        assert a[1]["transition"]["observation"] != c[1]["transition"]["observation"]
    finally:
        server.shutdown()
        server.server_close()

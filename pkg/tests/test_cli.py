import json

import pytest

from container_sim.cli import main
from container_sim.config import save_config
from helpers import CONFIGS_DIR, container, env_config, single_container_cfg


@pytest.fixture()
def overflow_cfg_path(tmp_path):
    cfg = single_container_cfg(fill_rate=1.0 / 60, noise_std_per_sec=0.0,
                               initial_volume_range=(30.0, 30.0),
                               max_episode_steps=100)
    path = tmp_path / "overflow.json"
    save_config(cfg, path)
    return path


def test_validate_shipped_config_exits_zero(capsys):
    assert main(["validate", "--config", str(CONFIGS_DIR / "synthetic-5-2-60.json")]) == 0
    out = capsys.readouterr().out
    assert "valid" in out
    assert "warning" not in out


def test_validate_invalid_config_exits_one(tmp_path, capsys):
    path = tmp_path / "bad.json"
    good = json.loads((CONFIGS_DIR / "synthetic-5-2-60.json").read_text())
    good["reward_penalty"] = 0.1
    path.write_text(json.dumps(good))
    assert main(["validate", "--config", str(path)]) == 1
    assert "reward_penalty must be negative" in capsys.readouterr().err


def test_validate_overlapping_peaks_warns_but_passes(tmp_path, capsys):
    cfg = env_config([container(product_size=2.0,
                                optima=((20.0, 1.0, 5.0), (22.0, 0.9, 5.0)))])
    path = tmp_path / "overlap.json"
    save_config(cfg, path)
    assert main(["validate", "--config", str(path)]) == 0
    assert "reward exceeds 1" in capsys.readouterr().out


def test_rollout_zero_noise_overflow_summary(tmp_path, overflow_cfg_path, capsys):
    out_dir = tmp_path / "out"
    rc = main(["rollout", "--config", str(overflow_cfg_path), "--policy", "do-nothing",
               "--episodes", "1", "--seed", "3", "--out-dir", str(out_dir)])
    assert rc == 0
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["mean_cumulative_reward"] == -1.0
    assert summary["std_cumulative_reward"] == 0.0
    assert summary["per_episode"][0]["overflow"] is True
    assert (out_dir / "trace_seed3.csv").exists()
    assert "-1.0000" in capsys.readouterr().out


def test_rollout_repeat_runs_are_byte_identical(tmp_path, overflow_cfg_path):
    outs = []
    for name in ("a", "b"):
        out_dir = tmp_path / name
        main(["rollout", "--config", str(overflow_cfg_path), "--policy", "do-nothing",
              "--episodes", "3", "--seed", "1", "--out-dir", str(out_dir)])
        outs.append({p.name: p.read_bytes() for p in sorted(out_dir.iterdir())})
    assert outs[0] == outs[1]
    assert set(outs[0]) == {"summary.json", "trace_seed1.csv", "trace_seed2.csv",
                            "trace_seed3.csv"}


def _rollout_rule_based(tmp_path, episodes=4, max_steps=400):
    out_dir = tmp_path / "traces"
    rc = main(["rollout", "--config", str(CONFIGS_DIR / "synthetic-5-5-120.json"),
               "--policy", "rule-based", "--episodes", str(episodes),
               "--seed", "1", "--max-steps", str(max_steps),
               "--out-dir", str(out_dir)])
    assert rc == 0
    return out_dir


def test_analyze_ecdf_volumes_sorted_ends_at_one(tmp_path):
    traces = _rollout_rule_based(tmp_path)
    out_dir = tmp_path / "analysis"
    rc = main(["analyze", "--traces", str(traces), "--mode", "ecdf-volumes",
               "--out-dir", str(out_dir)])
    assert rc == 0
    rows = (out_dir / "ecdf_volumes.csv").read_text().splitlines()
    assert rows[0] == "value,cumulative_fraction"
    values = [float(r.split(",")[0]) for r in rows[1:]]
    fractions = [float(r.split(",")[1]) for r in rows[1:]]
    assert values == sorted(values)
    assert fractions[-1] == 1.0


def test_analyze_per_container_and_rewards(tmp_path):
    traces = _rollout_rule_based(tmp_path)
    out_dir = tmp_path / "analysis"
    rc = main(["analyze", "--traces", str(traces), "--mode", "ecdf-rewards",
               "--per-container", "--out-dir", str(out_dir)])
    assert rc == 0
    files = sorted(p.name for p in out_dir.iterdir())
    assert files == [f"ecdf_rewards_c{i}.csv" for i in range(1, 6)]


def test_analyze_rule_based_reward_mass_above_threshold(tmp_path):
    # m = n: nearly every emptying finds a free PU near the ideal volume,
    # so at most 10% of the reward mass may sit below 0.75
    traces = _rollout_rule_based(tmp_path, episodes=8, max_steps=600)
    out_dir = tmp_path / "analysis"
    assert main(["analyze", "--traces", str(traces), "--mode", "ecdf-rewards",
                 "--out-dir", str(out_dir)]) == 0
    rows = (out_dir / "ecdf_rewards.csv").read_text().splitlines()[1:]
    pairs = [tuple(map(float, r.split(","))) for r in rows]
    below = [frac for value, frac in pairs if value < 0.75]
    assert (below[-1] if below else 0.0) <= 0.10


def test_analyze_no_emptyings_warns_with_empty_table(tmp_path, overflow_cfg_path, capsys):
    traces = tmp_path / "traces"
    main(["rollout", "--config", str(overflow_cfg_path), "--policy", "do-nothing",
          "--episodes", "1", "--seed", "1", "--out-dir", str(traces)])
    out_dir = tmp_path / "analysis"
    rc = main(["analyze", "--traces", str(traces), "--mode", "ecdf-volumes",
               "--out-dir", str(out_dir)])
    assert rc == 0
    assert "warning" in capsys.readouterr().err
    assert (out_dir / "ecdf_volumes.csv").read_text() == "value,cumulative_fraction\n"


def test_analyze_trace_plot_data(tmp_path):
    traces = _rollout_rule_based(tmp_path, episodes=1)
    out_dir = tmp_path / "plots"
    rc = main(["analyze", "--traces", str(traces), "--mode", "trace-plot-data",
               "--out-dir", str(out_dir)])
    assert rc == 0
    vol = (out_dir / "trace_seed1_volumes.csv").read_text().splitlines()
    assert vol[0] == "t," + ",".join(f"v_{i}" for i in range(1, 6))
    assert len(vol) == 401
    rewards = (out_dir / "trace_seed1_rewards.csv").read_text().splitlines()
    assert rewards[0] == "t,reward"
    assert all(float(r.split(",")[1]) != 0.0 for r in rewards[1:])


def test_benchmark_table_shape_and_ordering(capsys):
    args = ["benchmark", "--grid", "5,2,120", "--grid", "5,5,120",
            "--episodes", "5", "--seed", "1", "--max-steps", "400", "--jobs", "2"]
    assert main(args) == 0
    out1 = capsys.readouterr().out
    lines = [l for l in out1.strip().splitlines() if l]
    assert len(lines) == 3  # header + one row per grid point
    assert lines[0].split()[0] == "config"

    row = lines[1]
    rule_mean = float(row.split()[1])
    random_mean = float(row.split()[4])
    assert rule_mean > random_mean

    assert main(args) == 0
    assert capsys.readouterr().out == out1  # deterministic table


def test_benchmark_unsupported_grid_point(capsys):
    assert main(["benchmark", "--grid", "5,7,60"]) == 1
    assert "unsupported grid point" in capsys.readouterr().err


def test_usage_errors_exit_one(capsys):
    assert main(["rollout", "--nope"]) == 1
    assert main(["frobnicate"]) == 1
    assert main([]) == 1


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    out = capsys.readouterr().out
    for sub in ("validate", "rollout", "analyze", "benchmark", "serve"):
        assert sub in out
    assert main(["rollout", "--help"]) == 0
    out = capsys.readouterr().out
    for flag in ("--config", "--policy", "--threshold", "--episodes", "--seed",
                 "--max-steps", "--jobs", "--out-dir"):
        assert flag in out

import json

import pytest

from skfnav.cli import main


@pytest.fixture
def balloon_cfg(tmp_path):
    path = tmp_path / "balloon.json"
    path.write_text(json.dumps({
        "scenario": "balloon", "n_steps": 80, "dt": 0.01, "q_x": 1e-4, "q_p": 1e-4,
        "r": 1e-6, "delta": 1, "seed": 0,
        "bias": {"kind": "static", "A": 0.2}, "true_switch_step": 40,
    }))
    return path


@pytest.fixture
def sweep_cfg(tmp_path):
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps({
        "scenario": "balloon", "name": "cli-sweep",
        "base": {"n_steps": 50, "dt": 0.01, "q_x": 1e-6, "q_p": 1e-6, "delta": 1,
                 "true_switch_step": 25},
        "axes": {"A": [0.0, 0.2]},
        "seeds": 2,
    }))
    return path


def test_simulate_happy_path(tmp_path, balloon_cfg):
    out = tmp_path / "runs"
    rc = main(["--quiet", "simulate", "balloon", "--config", str(balloon_cfg),
               "--seed", "42", "--out", str(out)])
    assert rc == 0
    run_dirs = list(out.glob("run-*-s42"))
    assert len(run_dirs) == 1
    assert (run_dirs[0] / "records.csv").exists()
    assert (run_dirs[0] / "summary.json").exists()


def test_simulate_scenario_mismatch(tmp_path, balloon_cfg):
    rc = main(["--quiet", "simulate", "shuttle", "--config", str(balloon_cfg),
               "--out", str(tmp_path)])
    assert rc == 2


def test_missing_config_is_config_error(tmp_path):
    rc = main(["--quiet", "simulate", "balloon", "--config", str(tmp_path / "nope.json")])
    assert rc == 2


def test_schema_violation_is_config_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"scenario": "balloon", "n_steps": -5}))
    rc = main(["--quiet", "validate-config", "--config", str(bad)])
    assert rc == 2


def test_unknown_flag_exits_two(balloon_cfg):
    rc = main(["simulate", "balloon", "--config", str(balloon_cfg), "--bogus"])
    assert rc == 2


def test_expect_outcome_gate(tmp_path):
    path = tmp_path / "expect.json"
    path.write_text(json.dumps({
        "scenario": "balloon", "n_steps": 60, "dt": 0.01, "q_x": 1e-6, "q_p": 1e-6,
        "r": 1e-6, "delta": 1, "seed": 0, "true_switch_step": None,
        "bias": {"kind": "quadratic"},
        "expect_outcome": "red",
    }))
    rc = main(["--quiet", "simulate", "balloon", "--config", str(path),
               "--out", str(tmp_path / "runs")])
    assert rc == 1  # clean run classifies green, expectation says red


def test_sweep_then_report(tmp_path, sweep_cfg):
    out = tmp_path / "runs"
    rc = main(["--quiet", "sweep", "--config", str(sweep_cfg), "--out", str(out),
               "--threads", "1"])
    assert rc == 0
    target = out / "cli-sweep"
    assert (target / "aggregates.csv").exists()
    rc = main(["--quiet", "report", "--records", str(target), "--out", str(tmp_path / "rep")])
    assert rc == 0
    table = (tmp_path / "rep" / "summary_table.csv").read_text().splitlines()
    assert table[0].startswith(
        "test,config_hash,seed,r,q_x,q_p,delta,A,B,C,true_switch_step,est_switch_step,outcome"
    )
    assert len(table) == 5  # header + 4 records
    assert (tmp_path / "rep" / "aggregates.csv").exists()
    assert list((tmp_path / "rep" / "plots").glob("success_rate_*.json"))


def test_report_without_records(tmp_path):
    rc = main(["--quiet", "report", "--records", str(tmp_path)])
    assert rc == 2


def test_validate_config_ok(sweep_cfg, capsys):
    rc = main(["--quiet", "validate-config", "--config", str(sweep_cfg)])
    assert rc == 0
    assert "sweep" in capsys.readouterr().out


def test_branches_override(tmp_path, balloon_cfg):
    out = tmp_path / "runs"
    rc = main(["--quiet", "simulate", "balloon", "--config", str(balloon_cfg),
               "--out", str(out), "--branches", "4"])
    assert rc == 0
    summary = json.loads(next(out.glob("run-*/summary.json")).read_text())
    assert summary["config"]["capacity"] == 4
    # capacity bounds surviving hypotheses: nominal + at most 3 corrupted
    assert len(summary["weights"]) <= 4

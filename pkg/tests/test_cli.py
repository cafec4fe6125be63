"""Command-line interface: tasks, scenarios, determinism and exit codes."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from gameenv.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, fmt_num, main, parse_grid
from gameenv.errors import ParameterError

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"
HOPF_EXAMPLE = str(SCENARIOS / "params" / "hopf_example.json")
BALANCED_EXAMPLE = str(SCENARIOS / "params" / "balanced_example.toml")


def run(*argv):
    return main([str(a) for a in argv])


def test_bifurc_json(tmp_path, capsys):
    assert run("--params", HOPF_EXAMPLE, "--out", tmp_path, "bifurc") == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert abs(out["hopf"]["mu1"] - 29 / 188) < 1e-11
    saved = json.loads((tmp_path / "bifurcation.json").read_text())
    assert saved == out


def test_equilibria_from_toml(capsys):
    assert run("--params", BALANCED_EXAMPLE, "equilibria") == EXIT_OK
    reps = json.loads(capsys.readouterr().out)
    assert reps[0]["kind"] == "Interior" and reps[0]["r"] == 0.5


def test_simulate_writes_csv(tmp_path, capsys):
    code = run("--params", HOPF_EXAMPLE, "--out", tmp_path, "simulate", "--start", 0.3, 0.4, "--t-end", 5)
    assert code == EXIT_OK
    lines = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,x,r"
    assert lines[1] == ",".join(fmt_num(v) for v in (0.0, 0.3, 0.4))


def test_json_format_and_tol_override(tmp_path, capsys):
    code = run("--params", HOPF_EXAMPLE, "--out", tmp_path, "--format", "json", "--tol", "rel_tol=1e-6",
               "simulate", "--start", 0.3, 0.4, "--t-end", 5)
    assert code == EXIT_OK
    rows = json.loads((tmp_path / "trajectory.json").read_text())
    assert set(rows[0]) == {"t", "x", "r"}


def test_lienard_check(capsys):
    assert run("--params", BALANCED_EXAMPLE, "lienard-check") == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["all_pass"] and out["conditions"]["4_literal"]["verdict"] == "Fail"


def test_sweep_is_deterministic(tmp_path, capsys):
    for k in (1, 2):
        assert run("--params", BALANCED_EXAMPLE, "--out", tmp_path / str(k), "sweep", "--grid", "0.05,0.15,0.3") == EXIT_OK
    first = (tmp_path / "1" / "diagram.csv").read_bytes()
    assert first == (tmp_path / "2" / "diagram.csv").read_bytes()
    assert first.splitlines()[-1].endswith(b",absent")


def test_scenario_fig2b(tmp_path, capsys):
    assert run("--out", tmp_path, "run", SCENARIOS / "fig2b.json") == EXIT_OK
    summary = json.loads((tmp_path / "fig2b_summary.json").read_text())
    assert summary["passed"]
    assert summary["summary"]["cycle"]["r_amplitude"] < 0.15


def test_failed_check_exit_code(tmp_path, capsys):
    assert run("--out", tmp_path, "run", SCENARIOS / "fig5d.json") == EXIT_CHECK


@pytest.mark.parametrize("argv", [
    ("--params", BALANCED_EXAMPLE, "sweep", "--grid", ""),
    ("--params", BALANCED_EXAMPLE, "sweep", "--grid", "0.3,0.1"),
    ("--params", "missing.json", "equilibria"),
    ("equilibria",),
    ("--params", HOPF_EXAMPLE, "--tol", "bogus=1", "simulate", "--start", "0.3", "0.4"),
    ("--params", HOPF_EXAMPLE, "simulate"),
    ("--params", HOPF_EXAMPLE, "lienard-check"),
    ("reproduce-figure", "fig9"),
    ("bogus-task",),
])
def test_config_errors(argv, capsys):
    assert run(*argv) == EXIT_CONFIG
    capsys.readouterr()


def test_empty_grid_in_scenario(tmp_path, capsys):
    scen = tmp_path / "empty.json"
    scen.write_text(json.dumps({"name": "empty", "task": "sweep", "params_file": BALANCED_EXAMPLE,
                                "options": {"param": "mu", "grid": []}}))
    assert run("run", scen) == EXIT_CONFIG
    assert "grid is empty" in capsys.readouterr().err


@pytest.mark.parametrize("payload", [
    {"task": "sweep"}, {"name": "x", "task": "plot"},
    {"name": "x", "task": "reproduce-figure", "options": {"figure": "fig6"}},
])
def test_malformed_scenarios(tmp_path, payload, capsys):
    scen = tmp_path / "bad.json"
    scen.write_text(json.dumps(payload))
    assert run("run", scen) == EXIT_CONFIG


def test_numeric_failure_exit_code(tmp_path, capsys):
    code = run("--params", HOPF_EXAMPLE, "--tol", "max_step=1e-15", "simulate", "--start", 0.3, 0.4, "--t-end", 1)
    assert code == EXIT_NUMERIC
    assert "numerical failure" in capsys.readouterr().err


def test_parse_grid():
    assert parse_grid("0:0.3:0.1") == [0.0, 0.1, 0.2]
    assert parse_grid([0.1, 0.2]) == [0.1, 0.2]
    with pytest.raises(ParameterError):
        parse_grid("1:2:0")


@pytest.mark.parametrize("scenario", sorted(p.name for p in SCENARIOS.glob("*.json")))
def test_bundled_scenarios_load(scenario):
    data = json.loads((SCENARIOS / scenario).read_text())
    assert {"name", "task"} <= set(data)


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "gameenv", "--params", HOPF_EXAMPLE, "bifurc"],
                          capture_output=True, text=True, cwd=tmp_path)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["hopf"]["admissible"]

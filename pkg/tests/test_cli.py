import json
import subprocess
import sys

import pytest

from ris_planner.cli import main
from ris_planner.scenario import SEED_ENV, bundled_example


@pytest.fixture
def scenario(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(bundled_example())
    return p


def _run(*args):
    return main([str(a) for a in args])


def test_example(tmp_path):
    out = tmp_path / "e.json"
    assert _run("example", "--name", "4x4", "--out", out) == 0
    assert out.read_text() == bundled_example()
    assert _run("example", "--name", "nope") == 2


@pytest.mark.parametrize("baseline", ["greedy", "single-only", "random", "exact"])
def test_deploy_is_reproducible(tmp_path, scenario, baseline):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert _run("deploy", "--scenario", scenario, "--baseline", baseline, "--out", a) == 0
    assert _run("deploy", "--scenario", scenario, "--baseline", baseline, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert doc["report"]["blind"] == 37


def test_deploy_greedy_content(tmp_path, scenario):
    out = tmp_path / "p.json"
    _run("deploy", "--scenario", scenario, "--out", out)
    doc = json.loads(out.read_text())
    assert doc["plan"]["selected"] == [7, 1, 12]
    _run("deploy", "--scenario", scenario, "--max-ris", 1, "--out", out)
    assert json.loads(out.read_text())["plan"]["selected"] == [7]


def test_select(tmp_path, scenario):
    plan, a, b = tmp_path / "p.json", tmp_path / "a.json", tmp_path / "b.json"
    _run("deploy", "--scenario", scenario, "--baseline", "exact", "--out", plan)
    assert _run("select", "--scenario", scenario, "--plan", plan, "--out", a) == 0
    assert _run("select", "--scenario", scenario, "--plan", plan, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert len(doc["selections"]) == 37
    modes = {s["mode"] for s in doc["selections"]}
    assert modes <= {"Single", "Double", "Infeasible"}
    for s in doc["selections"]:
        if s["mode"] != "Infeasible":
            assert s["throughput_bps"] >= doc["t_threshold"]
    assert _run("select", "--scenario", scenario, "--plan", plan, "--t-th", 1e15, "--out", a) == 0
    assert {s["mode"] for s in json.loads(a.read_text())["selections"]} == {"Infeasible"}


def test_seed_env_changes_channels(tmp_path, scenario, monkeypatch):
    plan, a, b = tmp_path / "p.json", tmp_path / "a.json", tmp_path / "b.json"
    _run("deploy", "--scenario", scenario, "--out", plan)
    monkeypatch.setenv(SEED_ENV, "1")
    _run("select", "--scenario", scenario, "--plan", plan, "--shared", "--out", a)
    monkeypatch.setenv(SEED_ENV, "2")
    _run("select", "--scenario", scenario, "--plan", plan, "--shared", "--out", b)
    assert a.read_bytes() != b.read_bytes()
    monkeypatch.setenv(SEED_ENV, "bad")
    assert _run("select", "--scenario", scenario, "--plan", plan, "--out", b) == 2


def test_sweep(tmp_path, scenario):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "--scenario", scenario, "--var", "obstacle_count", "--values", "1,2",
            "--trials", 2, "--n-devices", 10]
    assert _run(*args, "--out", a) == 0
    assert _run(*args, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0].startswith("sweep_var,value,trial,n_ris")
    assert _run("sweep", "--scenario", scenario, "--var", "device_count", "--values", "x",
                "--out", a) == 2


def test_exit_codes(tmp_path, scenario):
    assert _run("deploy", "--scenario", tmp_path / "missing.json") == 2
    bad = tmp_path / "bad.json"
    bad.write_text(bundled_example().replace("[3, 10, 14]", "[3, 10, 17]"))
    assert _run("deploy", "--scenario", bad) == 2
    assert _run("deploy", "--scenario", scenario, "--baseline", "exact", "--max-ris", 2) == 2
    plan = tmp_path / "plan.json"
    plan.write_text("{}")
    assert _run("select", "--scenario", scenario, "--plan", plan) == 2


def test_console_entry_point(tmp_path, scenario):
    out = tmp_path / "o.json"
    r = subprocess.run([sys.executable, "-m", "ris_planner.cli", "deploy", "--scenario", str(scenario),
                        "--out", str(out)], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert json.loads(out.read_text())["report"]["covered"] == 37

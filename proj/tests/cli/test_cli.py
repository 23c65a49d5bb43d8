import os
import pathlib
import subprocess

import pytest

IPSIM = os.environ.get("IPSIM")
DATA = pathlib.Path(__file__).resolve().parent.parent / "data"

pytestmark = pytest.mark.skipif(not IPSIM, reason="IPSIM not set")


def run(*args, env=None):
    full_env = dict(os.environ)
    full_env.pop("IPS_THREADS", None)
    full_env.update(env or {})
    return subprocess.run([IPSIM, *args], capture_output=True, text=True, env=full_env)


def test_help_lists_flags():
    out = run("--help")
    assert out.returncode == 0
    for flag in ["--config", "--seed", "--replicas", "--threads", "--out", "--override", "IPS_THREADS"]:
        assert flag in out.stdout


def test_simulate_rerun_is_byte_identical(tmp_path):
    cfg = str(DATA / "simulate_path3.json")
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert run("--config", cfg, "--out", str(a)).returncode == 0
    assert run("--config", cfg, "--out", str(b)).returncode == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 3
    assert not list(tmp_path.glob("*.tmp.*"))


@pytest.mark.parametrize("command", ["simulate", "percolate", "counterexample", "localize"])
def test_thread_count_does_not_change_outputs(tmp_path, command):
    extra = {
        "simulate": ["--config", str(DATA / "simulate_path3.json"), "--replicas", "20"],
        "percolate": ["--config", str(DATA / "percolate_grid.json"), "--replicas", "100"],
        "counterexample": ["--seed", "5", "--replicas", "30", "--override", "depth=4"],
        "localize": ["--seed", "5", "--replicas", "30", "--override",
                     'graph={"generator":"ugw","offspring":{"poisson":2}}', 'model={"name":"contact","lambda":0.5}'],
    }[command]
    outs = []
    for i, (flag, env) in enumerate([(["--threads", "1"], None), (["--threads", "4"], None), ([], {"IPS_THREADS": "3"})]):
        path = tmp_path / f"out{i}"
        res = run(command, *extra, *flag, "--out", str(path), env=env)
        assert res.returncode == 0, res.stderr
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_config_error_exit_code():
    res = run("--config", str(DATA / "simulate_path3.json"), "--override", "model.lambda=-2")
    assert res.returncode == 2
    assert "/model/lambda" in res.stderr
    assert run("simulate", "--seed", "1").returncode == 2
    assert run("--bogus-flag").returncode == 2


def test_exhaustion_exit_code(tmp_path):
    res = run("localize", "--seed", "1", "--replicas", "3", "--out", str(tmp_path / "t.csv"), "--override", "budget=30",
              'graph={"generator":"ugw","offspring":{"poisson":4}}', 'model={"name":"contact","lambda":4}')
    assert res.returncode == 3
    assert (tmp_path / "t.csv").exists()


def test_percolate_golden(tmp_path):
    out = tmp_path / "p.csv"
    assert run("--config", str(DATA / "percolate_grid.json"), "--out", str(out)).returncode == 0
    assert out.read_text() == (DATA / "percolate_grid.csv").read_text()


def test_counterexample_writes_summary(tmp_path):
    out = tmp_path / "ce.csv"
    assert run("counterexample", "--seed", "2", "--replicas", "10", "--override", "depth=3", "--out", str(out)).returncode == 0
    summary = (tmp_path / "ce.csv.summary.csv").read_text().splitlines()
    assert summary[0].startswith("depth,replicas,exhaustiveFrequency")
    assert len(summary) == 4

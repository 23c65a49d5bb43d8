import json
import math

import pytest

ips = pytest.importorskip("ips")

CONTACT = {"name": "contact", "lambda": 1.0}


def path3():
    return ips.Graph.from_dict(
        {
            "vertices": [{"id": 0, "state": 1}, {"id": 1}, {"id": 2}],
            "edges": [{"u": 0, "v": 1}, {"u": 1, "v": 2}],
            "root": 1,
        }
    )


def test_graph_round_trip():
    g = path3()
    assert len(g) == 3 and g.edge_count == 2 and g.root == 1
    assert ips.Graph.from_dict(g.to_dict()).to_dict() == g.to_dict()


def test_invalid_graph_rejected():
    with pytest.raises(ips.Error):
        ips.Graph.from_dict({"vertices": [{"id": 0}], "edges": [{"u": 0, "v": 0}]})


def test_simulation_is_deterministic_and_verifies():
    g = path3()
    noise = ips.Noise(42, CONTACT, 1.0)
    a = ips.simulate(g, CONTACT, noise, 1.0)
    b = ips.simulate(g, ips.ContactModel(1.0), noise, 1.0)
    assert a == b
    assert ips.verify(g, CONTACT, noise, a, 1.0)
    for traj in a:
        times = [t for t, _ in traj.jumps]
        assert times == sorted(times)


def test_localized_matches_full_simulation():
    g = ips.generate({"generator": "erdos_renyi", "n": 60, "c": 2, "initial": {"p": 0.3}}, seed=5)
    for seed in range(20):
        noise = ips.Noise(seed, CONTACT, 1.0)
        full = ips.simulate(g, CONTACT, noise, 1.0)
        loc = ips.localized_marginal(ips.Graph.from_dict(g.to_dict()), CONTACT, noise, [0], 1.0)
        assert loc[0] == full[0]


def test_oracle_single_vertex():
    g = ips.Graph()
    g.add_vertex(1)
    marg = ips.ctmc_oracle(g, CONTACT, [0.5, 1.0])
    for i, t in enumerate([0.5, 1.0]):
        assert marg[i][0][0] == pytest.approx(1 - math.exp(-t), abs=1e-10)


def test_counterexample_replay():
    res = ips.counterexample(depth=4, seed=3)
    assert res["zero_ok"] and res["tilde_ok"]
    if res["found"]:
        assert res["root_time"] == res["times"][-1]


def test_run_percolate_and_config_errors():
    cfg = {
        "command": "percolate",
        "seed": 7,
        "replicas": 50,
        "graph": {"generator": "grid", "dims": [10, 10]},
        "model": CONTACT,
        "deltaGrid": [0.05, 0.1],
    }
    out = ips.run(cfg)
    assert out["exit_code"] == 0
    lines = out["artifacts"][""].strip().split("\n")
    assert lines[0] == "delta,meanRootComponent,p95RootComponent,fracExhausted,EZ,EZ_stderr,certified"
    assert len(lines) == 3
    assert ips.run(json.loads(json.dumps(cfg)))["artifacts"] == out["artifacts"]
    cfg["model"] = {"name": "contact", "lambda": -1}
    with pytest.raises(ips.ConfigError, match="/model/lambda"):
        ips.run(cfg)

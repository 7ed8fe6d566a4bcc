import json

import pytest

from skewmirror import cli
from skewmirror.linalg import AmbiguityError


def run_json(*argv):
    code, rep, text = cli.run(list(argv) + ["--json"])
    return code, (json.loads(text) if rep is not None else None)


def strip_timings(d):
    d = dict(d)
    d.pop("timings")
    return d


def test_params_commutative_flag():
    code, rep = run_json("params", "--t", "0", "--s", "0.5", "--q0", "0.3")
    assert code == 0
    assert rep["schema"] == "skew-mirror/1"
    assert rep["outputs"]["flags"]
    assert rep["residuals"]["truncation"]["ok"]


def test_params_trivial_phase():
    code, rep = run_json("params", "--t", "0.1", "--s", "0", "--q0", "0.3")
    re, im = rep["outputs"]["abc"][0]
    assert code == 0 and re > 0 and im == 0


def test_params_certified_truncation():
    code, rep = run_json("params", "--q0", "0.9", "--K", "1")
    assert code == 0
    r = rep["residuals"]["truncation"]
    assert r["value"] <= r["tol"]


def test_central():
    code, rep = run_json("central")
    assert code == 0
    assert rep["solution_dims"]["ansatz_nullity"] == 1
    assert rep["residuals"]["centrality"]["value"] <= 1e-10
    code, rep = run_json("central", "--t", "0", "--s", "0.5", "--q0", "0.3", "--degree-cap", "4")
    assert code == 0 and rep["solution_dims"]["full_nullity"] == 10


def test_mf_report():
    code, rep = run_json("mf", "--which", "L", "--degree-cap", "4")
    assert code == 0
    mf = rep["outputs"]["matrix_factorization"]
    assert mf["D1"]["source_twists"] == [-3, -4, -4, -4]
    assert mf["D0"]["target_twists"] == [0, -1, -1, -1]
    assert rep["outputs"]["pattern_ok"]
    assert all(v["ok"] for v in rep["residuals"].values())


def test_mf_fault_injection_fails():
    code, rep = run_json("mf", "--degree-cap", "4", "--fault-inject", "Y")
    assert code == 1
    assert not rep["residuals"]["D0D1-W"]["ok"]


@pytest.mark.parametrize("target", ["k", "cone", "B1"])
def test_resolve(target):
    code, rep = run_json("resolve", "--target", target)
    assert code == 0
    assert rep["outputs"]["dim_B"][:5] == [1, 3, 6, 9, 12]


def test_fukaya():
    code, rep = run_json("fukaya", "--t", "0", "--s", "0.13", "--q0", "0.2")
    assert code == 0
    assert rep["outputs"]["area_ratios"]["a"][:4] == ["1/1", "25/1", "49/1", "121/1"]
    assert rep["outputs"]["holonomy_ladder"]["a"] == ["39/100"]


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# generic point\nt = 0\ns = 0.5\nq0 = 0.3\noutput = json\n")
    code, rep, text = cli.run(["params", "--config", str(cfg)])
    assert code == 0 and json.loads(text)["outputs"]["flags"]
    # flags override the file
    code, rep, text = cli.run(["params", "--config", str(cfg), "--s", "0.25"])
    assert not json.loads(text)["outputs"]["flags"]


@pytest.mark.parametrize("argv", [
    ["params", "--tol", "0.1"],
    ["params", "--degree-cap", "3"],
    ["params", "--q0", "1.5"],
    ["params", "--fault-inject", "W"],
    ["fukaya", "--t", "0.3333333333333333", "--k-window", "2"],
    ["bogus"],
])
def test_config_errors(argv):
    assert cli.run(argv)[0] == 2


def test_bad_config_file(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert cli.run(["params", "--config", str(cfg)])[0] == 2
    cfg.write_text("t 0.1\n")
    assert cli.run(["params", "--config", str(cfg)])[0] == 2
    assert cli.run(["params", "--config", str(tmp_path / "missing.cfg")])[0] == 2


def test_ambiguity_exit_code(monkeypatch):
    def boom(*a, **k):
        raise AmbiguityError("forced", 1e-8, 1e-8)

    monkeypatch.setattr(cli, "cmd_central", boom)
    assert cli.run(["central"])[0] == 3


def test_determinism_and_cache(tmp_path):
    fresh = [run_json("central", "--degree-cap", "4")[1] for _ in range(2)]
    cached = [run_json("central", "--degree-cap", "4", "--cache-dir", str(tmp_path))[1] for _ in range(2)]
    assert len(list(tmp_path.iterdir())) == 1
    texts = {json.dumps(strip_timings(r), sort_keys=True) for r in fresh + cached}
    assert len(texts) == 1


def test_seed_is_recorded():
    code, rep = run_json("mf", "--degree-cap", "4", "--seed", "5")
    assert code == 0 and rep["inputs"]["seed"] == 5


def test_verify_all_default_and_tight_tol():
    code, rep = run_json("verify-all")
    assert code == 0 and len(rep["outputs"]["criteria"]) == 10
    code, rep = run_json("verify-all", "--tol", "1e-15")
    assert code == 0
    assert any("ambiguous" in w for w in rep["warnings"])


def test_verify_all_fault_injection():
    code, rep = run_json("verify-all", "--fault-inject", "X")
    assert code == 1
    failed = [c["number"] for c in rep["outputs"]["criteria"] if not c["passed"]]
    assert failed == [4]


def test_main_prints(capsys):
    assert cli.main(["params", "--t", "0", "--s", "0.5", "--q0", "0.3"]) == 0
    assert "commutative" in capsys.readouterr().out
    assert cli.main(["params", "--tol", "1"]) == 2
    assert "config error" in capsys.readouterr().err

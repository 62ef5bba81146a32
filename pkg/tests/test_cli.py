import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from beltrami_lab.cli import ExperimentConfig, UsageError, main, parse_coefficient
from beltrami_lab.grid import ComplexGrid, read_binary, write_binary


def _run(tmp_path, *args, out="out"):
    d = tmp_path / out
    code = main([*args, "--out", str(d)])
    return code, d


def _summary(d):
    return json.loads((d / "summary.json").read_text())


def test_parse_coefficient():
    assert parse_coefficient("g_eps(p=1, eps=0.5)") == {"id": "g_eps", "p": 1.0, "eps": 0.5}
    assert parse_coefficient("zero") == {"id": "zero"}
    for bad in ("power(K=2", "power(K)", "power(K=x)"):
        with pytest.raises(UsageError):
            parse_coefficient(bad)


def test_zero_coefficient_solve(tmp_path):
    code, d = _run(tmp_path, "solve", "--n", "64")
    assert code == 0
    f = read_binary(d / "f.bin")
    assert np.allclose(f.values, f.z)
    s = _summary(d)
    assert s["identity_map"] and s["passed"]
    assert {"f.bin", "dz.bin", "dzbar.bin", "decay.csv"} <= set(s["files"])


def test_failed_check_exits_2(tmp_path, capsys):
    # at n = 64 the K = 2 power map misses the 1e-3 closed-form accuracy
    code, d = _run(tmp_path, "solve", "--n", "64", "--coefficient", "power(K=2)")
    assert code == 2
    assert "FAIL closed-form" in capsys.readouterr().out
    assert not _summary(d)["passed"]


def test_usage_errors_list_everything(tmp_path, capsys):
    code, _ = _run(tmp_path, "decay", "--n", "100", "--coefficient", "g_eps(p=1)", "--k-cap", "1.5", "--eps-list", "0.1")
    assert code == 1
    err = capsys.readouterr().err
    for frag in ("grid:", "coefficient.eps", "params.k_cap", "params.eps_list"):
        assert frag in err


def test_argparse_errors_exit_1():
    with pytest.raises(SystemExit) as e:
        main(["nope"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["solve", "--n", "abc"])
    assert e.value.code == 1


def test_bad_beta_for_decay(tmp_path, capsys):
    code, _ = _run(tmp_path, "decay", "--n", "64", "--coefficient", "g_eps(p=1,eps=0.5)", "--beta", "1.5")
    assert code == 1
    assert "params.beta" in capsys.readouterr().err


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text(
        '[grid]\nn = 128\nside = 4.0\n\n[coefficient]\nid = "g_eps"\np = 1.0\neps = 0.5\n\n'
        "[params]\nbeta = 0.9\nn_max = 30\n"
    )
    code, d = _run(tmp_path, "decay", "--config", str(cfg), "--n", "64")
    s = _summary(d)
    assert s["config"]["n"] == 64 and s["config"]["params"]["beta"] == 0.9
    assert code in (0, 2)
    cfg.write_text("[grid]\nn = 64\nbogus = 1\n[extra]\n")
    code, _ = _run(tmp_path, "decay", "--config", str(cfg), out="o2")
    assert code == 1
    code, _ = _run(tmp_path, "decay", "--config", str(tmp_path / "missing.toml"), out="o3")
    assert code == 1


def test_hash_columns_and_determinism(tmp_path):
    args = ["decay", "--n", "64", "--coefficient", "g_eps(p=1,eps=0.5)", "--beta", "0.9"]
    _, a = _run(tmp_path, *args, out="a")
    _, b = _run(tmp_path, *args, out="b")
    ta, tb = (a / "decay.csv").read_bytes(), (b / "decay.csv").read_bytes()
    assert ta == tb
    rows = list(csv.DictReader(open(a / "decay.csv")))
    h = _summary(a)["config_hash"]
    assert len(h) == 12 and all(r["config_hash"] == h and r["tolerance_class"] == "grid:O(h)" for r in rows)
    assert (a / "bad_sets.csv").exists() and (a / "params.json").exists()
    _, c = _run(tmp_path, *args[:-1], "0.8", out="c")
    assert _summary(c)["config_hash"] != h


def test_config_hash_ignores_output_dir():
    a = ExperimentConfig.from_sources("solve", {"output": {"dir": "x"}})
    b = ExperimentConfig.from_sources("solve", {"output": {"dir": "y"}})
    assert a.config_hash == b.config_hash


def test_mu_file_input(tmp_path):
    mu = ComplexGrid.zeros(4.0, 64)
    write_binary(mu, tmp_path / "mu.bin")
    code, _ = _run(tmp_path, "solve", "--n", "64", "--mu-file", str(tmp_path / "mu.bin"))
    assert code == 0
    code, _ = _run(tmp_path, "solve", "--n", "128", "--mu-file", str(tmp_path / "mu.bin"), out="o2")
    assert code == 1


def test_radial_subcommand(tmp_path, capsys):
    code, d = _run(tmp_path, "radial", "--coefficient", "g_eps(p=1,eps=0.5)")
    assert code == 0
    s = _summary(d)
    assert s["trends"]["k_log(0.5)"]["trend"] == "divergent"
    assert s["trends"]["thm13i(0.5)"]["trend"] == "convergent"
    rows = list(csv.DictReader(open(d / "trend_k_log_0.5.csv")))
    assert rows[0]["tolerance_class"] == "quad1d:rtol=1e-10" and len(rows) == 39
    code, d = _run(tmp_path, "radial", "--coefficient", "alpha_sharp(alpha=2)", "--weight", "thm14(0.4)", out="a")
    assert code == 0 and _summary(d)["area_fit"]["r2"] >= 0.98


def test_area_and_sweep_and_regularity(tmp_path):
    code, d = _run(tmp_path, "area", "--n", "128", "--coefficient", "power(K=2)", out="area")
    assert code == 0 and _summary(d)["eh_max_ratio"] <= 1 / 2**0.5 + 0.05
    code, d = _run(tmp_path, "sweep", "--n", "128", "--coefficient", "g_eps(p=1,eps=0.5)", out="sweep")
    assert code == 0 and (d / "eps_sweep_radial.csv").exists()
    code, d = _run(tmp_path, "sweep", "--coefficient", "g_eps(p=1,eps=0.5)", "--skip-grid", out="sweep2")
    assert code == 0 and not (d / "eps_sweep.csv").exists()
    code, d = _run(tmp_path, "regularity", "--n", "128", "--coefficient", "g_eps(p=1,eps=0.5)", out="reg")
    assert code == 0 and (d / "regularity.csv").exists()


def test_console_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "beltrami_lab.cli", "solve", "--n", "32", "--out", str(tmp_path / "o")],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0 and "PASS identity map" in out.stdout

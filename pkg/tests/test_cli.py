"""CLI runner: exit codes, determinism, config validation, suite mode."""

import json

import pytest

from seqlab.cli import ConfigError, main, run_config, run_suite

SOLVE_CFG = {
    "set": {"kind": "box", "lo": [-1.0], "hi": [1.0]},
    "penalty": {"kind": "zero"},
    "x": [5.0],
}

TT_CFG = {
    "set": {"kind": "full_space", "n": 1},
    "penalty": {"kind": "zero"},
    "theta": [0.0],
    "seed": 7,
    "count": 1000,
}


def write_cfg(path, cfg):
    path.write_text(json.dumps(cfg))
    return str(path)


def test_solve_wraps_core_example(tmp_path, capsys):
    code = main(["solve", "--config", write_cfg(tmp_path / "c.json", SOLVE_CFG)])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["results"]["point"] == [1.0]
    assert report["pass"] is True


def test_cstar_no_config_needed(capsys):
    assert main(["cstar"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["results"]["cstar_lower"] >= 6.05e-6


def test_missing_config_exits_2(capsys):
    assert main(["risk"]) == 2
    assert "requires --config" in capsys.readouterr().err


def test_missing_field_exits_2(tmp_path, capsys):
    cfg = dict(SOLVE_CFG)
    del cfg["x"]
    assert main(["solve", "--config", write_cfg(tmp_path / "c.json", cfg)]) == 2
    assert "'x'" in capsys.readouterr().err


def test_malformed_json_exits_2(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["solve", "--config", str(p)]) == 2
    assert "malformed" in capsys.readouterr().err


def test_missing_seed_exits_2(tmp_path, capsys):
    cfg = dict(TT_CFG)
    del cfg["seed"]
    assert main(["ttheta", "--config", write_cfg(tmp_path / "c.json", cfg)]) == 2
    assert "seed" in capsys.readouterr().err


def test_unknown_experiment_rejected():
    with pytest.raises(ConfigError):
        run_config("frobnicate", {})


def test_determinism_byte_identical(tmp_path):
    cfg = write_cfg(tmp_path / "c.json", TT_CFG)
    out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
    assert main(["ttheta", "--config", cfg, "--output", str(out1)]) == 0
    assert main(["ttheta", "--config", cfg, "--output", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_csv_only_for_profiles(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "c.json", SOLVE_CFG)
    assert main(["solve", "--config", cfg, "--format", "csv"]) == 2
    width_cfg = {
        "set": {"kind": "box", "lo": [-1.0], "hi": [1.0]},
        "penalty": {"kind": "zero"},
        "theta": [0.0],
        "tgrid": [0.5, 1.0, 2.0],
        "seed": 3,
        "count": 500,
    }
    capsys.readouterr()
    cfg = write_cfg(tmp_path / "w.json", width_cfg)
    assert main(["width", "--config", cfg, "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "t,m_hat,stderr"


def test_suite_empty_dir_exits_2(tmp_path, capsys):
    assert main(["suite", str(tmp_path)]) == 2
    assert "no config files" in capsys.readouterr().err


def test_suite_aggregates_and_names_failures(tmp_path, capsys):
    ok = dict(SOLVE_CFG, experiment="solve")
    write_cfg(tmp_path / "a_ok.json", ok)
    # a solve that cannot converge in one iteration: forced FAIL
    bad = {
        "experiment": "solve",
        "set": {"kind": "ball", "center": [0.0, 0.0], "radius": 10.0},
        "penalty": {"kind": "l1", "lambda": 1.0},
        "x": [2.0, -0.5],
        "max_iter": 1,
        "tol": 1e-12,
    }
    write_cfg(tmp_path / "b_bad.json", bad)
    assert main(["suite", str(tmp_path)]) == 1
    agg = json.loads(capsys.readouterr().out)
    assert agg["pass"] is False
    assert agg["failed"] == ["b_bad.json"]
    assert [r["config"] for r in agg["runs"]] == ["a_ok.json", "b_bad.json"]


def test_suite_config_missing_experiment_field(tmp_path):
    write_cfg(tmp_path / "a.json", SOLVE_CFG)
    with pytest.raises(ConfigError):
        run_suite(tmp_path)


def test_run_config_experiment_mismatch(tmp_path):
    with pytest.raises(ConfigError):
        run_config("solve", dict(SOLVE_CFG, experiment="risk"))

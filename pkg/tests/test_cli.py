"""End-to-end command tests: artifacts, exit codes, reproducibility."""
import csv
import json
import shutil
import subprocess

import numpy as np
import pytest

from ruincone.cli import main, run_ratio_experiment

POINT_MODEL = {
    "radial": {"kind": "point", "value": 4.0},
    "core": [{"center": [0.5, 0.5], "radius": 0.0}],
    "cap_masses": [1.0],
    "off_direction": [-0.5, -0.5],
    "weight": {"family": "const", "value": 0.25},
}

WEIBULL_MODEL = {
    "radial": {"kind": "weibull", "beta": 0.5, "lambda": 1.0},
    "core": [{"center": [0.5, 0.5], "radius": 0.05}],
    "cap_masses": [1.0],
    "off_direction": [-0.5, -0.5],
    "weight": {"family": "rational", "kappa": 120.0},
}

TWO_CONE_MODEL = {
    "radial": {"kind": "weibull", "beta": 0.5, "lambda": 1.0},
    "core": [{"center": [0.7, 0.3], "radius": 0.05},
             {"center": [0.3, 0.7], "radius": 0.05}],
    "cap_masses": [0.5, 0.5],
    "off_direction": [-0.5, -0.5],
    "weight": {"family": "rational", "kappa": 120.0},
}


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def _read_csv(path):
    with open(path) as f:
        rows = list(csv.reader(f))
    return rows[0], rows[1:]


@pytest.fixture
def point_model_file(tmp_path):
    return _write(tmp_path / "model.json", POINT_MODEL)


# ----------------------------------------------------------------- simulate

def test_simulate_smoke(tmp_path, point_model_file):
    out = tmp_path / "sim"
    rc = main(["simulate", "--model", point_model_file, "--delta", "0.3",
               "--u", "1", "--u", "2", "--u", "3", "--paths", "2000",
               "--seed", "5", "--threads", "1", "--out", str(out)])
    assert rc == 0
    header, rows = _read_csv(out / "simulate.csv")
    assert header[:4] == ["u", "estimate", "ci_low", "ci_high"]
    assert len(rows) == 3
    ests = [float(r[1]) for r in rows]
    assert all(0.0 < e < 1.0 for e in ests)
    # no monotonicity claim: the default horizon grows with u, so shallow
    # thresholds are cut off earlier on this slow lattice walk
    man = json.loads((out / "manifest.json").read_text())
    assert man["tool"] == "ruincone"
    assert man["command"] == "simulate"
    assert man["drift_certificate"]["certified"] is True
    assert man["config"]["estimator"] == "crude"


def test_simulate_bigjump_smoke(tmp_path):
    model = _write(tmp_path / "m.json", WEIBULL_MODEL)
    out = tmp_path / "sim"
    rc = main(["simulate", "--model", model, "--delta", "0.3", "--u", "8",
               "--paths", "3000", "--seed", "2", "--estimator", "bigjump",
               "--threads", "1", "--out", str(out)])
    assert rc == 0
    _, rows = _read_csv(out / "simulate.csv")
    assert 0.0 < float(rows[0][1]) < 1.0
    man = json.loads((out / "manifest.json").read_text())
    assert man["config"]["estimator"] == "bigjump"
    assert man["step_schedule"]["family"] == "weibull"


def test_simulate_threads_do_not_change_artifacts(tmp_path, point_model_file):
    outs = []
    for name, threads in (("t1", "1"), ("t2", "2")):
        out = tmp_path / name
        rc = main(["simulate", "--model", point_model_file, "--delta", "0.3",
                   "--u", "2", "--paths", "20000", "--seed", "5",
                   "--threads", threads, "--out", str(out)])
        assert rc == 0
        outs.append(out)
    for fname in ("simulate.csv", "manifest.json"):
        assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()


def test_simulate_rejects_bad_delta(tmp_path, point_model_file, capsys):
    rc = main(["simulate", "--model", point_model_file, "--delta", "-1",
               "--u", "2", "--out", str(tmp_path / "x")])
    assert rc == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "config_validation"
    assert err["field"] == "delta"


def test_simulate_rejects_bad_model(tmp_path, capsys):
    bad = _write(tmp_path / "bad.json",
                 dict(POINT_MODEL, radial={"kind": "cauchy"}))
    rc = main(["simulate", "--model", bad, "--delta", "0.3", "--u", "2",
               "--out", str(tmp_path / "x")])
    assert rc == 2
    assert "config_validation" in capsys.readouterr().err


# --------------------------------------------------------------- asymptotic

def test_asymptotic_exact_point_mass(tmp_path, point_model_file):
    out = tmp_path / "asym"
    rc = main(["asymptotic", "--model", point_model_file,
               "--u", "1", "--u", "2", "--u", "3", "--out", str(out)])
    assert rc == 0
    header, rows = _read_csv(out / "asymptotic.csv")
    assert header == ["u", "asymptotic_ruin", "halfspace_integral",
                      "equivalence_gap"]
    # degenerate radius: integrated tail is (4-u)^+ over ||c|| = 2 exactly
    got = [float(r[1]) for r in rows]
    assert got == pytest.approx([1.5, 1.0, 0.5], rel=1e-12)


def test_console_script_runs(tmp_path, point_model_file):
    exe = shutil.which("ruincone")
    assert exe, "console script not installed"
    out = tmp_path / "asym"
    proc = subprocess.run([exe, "asymptotic", "--model", point_model_file,
                           "--u", "2", "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert (out / "asymptotic.csv").exists()


# -------------------------------------------------------- check-assumptions

def test_check_assumptions_inconclusive_exit(tmp_path, point_model_file):
    # a bounded radial tail vanishes everywhere on the diagnostic grids, so
    # the convolution checks cannot produce two feasible points
    out = tmp_path / "chk"
    rc = main(["check-assumptions", "--model", point_model_file,
               "--out", str(out)])
    assert rc == 3
    verdicts = json.loads((out / "assumptions.json").read_text())["verdicts"]
    assert "inconclusive" in verdicts.values()
    for aid in ("A1", "A2", "A3", "A4", "A5", "A6"):
        assert (out / f"assumption_{aid}.csv").exists()


def test_check_assumptions_exponential_conclusive(tmp_path):
    model = _write(tmp_path / "m.json", {
        "radial": {"kind": "exponential", "rate": 1.0},
        "core": [{"center": [0.5, 0.5], "radius": 0.05}],
        "cap_masses": [1.0],
        "off_direction": [-0.5, -0.5],
        "weight": {"family": "rational", "kappa": 8.0},
    })
    out = tmp_path / "chk"
    rc = main(["check-assumptions", "--model", model, "--out", str(out)])
    assert rc == 0
    verdicts = json.loads((out / "assumptions.json").read_text())["verdicts"]
    assert verdicts["A1"] == "inconsistent"  # light tail, by design
    assert verdicts["A4"] == "consistent"
    assert "inconclusive" not in verdicts.values()


# --------------------------------------------------------------- experiment

def _ratio_cfg(paths=2000, u=(1.0, 2.0, 3.0)):
    return {
        "model": POINT_MODEL,
        "delta": 0.3,
        "u": list(u),
        "paths": paths,
        "seed": 5,
        "estimator": "crude",
    }


def test_experiment_ratio_smoke(tmp_path):
    cfg = _write(tmp_path / "cfg.json", _ratio_cfg())
    out = tmp_path / "run"
    rc = main(["experiment", "ratio", "--config", cfg, "--threads", "1",
               "--out", str(out)])
    assert rc == 0
    header, rows = _read_csv(out / "ratio.csv")
    assert header[0] == "u" and "ratio" in header
    assert [float(r[4]) for r in rows] == pytest.approx([1.5, 1.0, 0.5],
                                                        rel=1e-12)
    summary = json.loads((out / "summary.json").read_text())
    assert summary["trend_verdict"] in ("consistent", "inconsistent")
    assert len(summary["rows"]) == 3


def test_experiment_ratio_rerun_is_byte_identical(tmp_path):
    cfg = _write(tmp_path / "cfg.json", _ratio_cfg())
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["experiment", "ratio", "--config", cfg, "--threads", "1",
                 "--out", str(out1)]) == 0
    assert main(["experiment", "ratio", "--config", cfg, "--threads", "2",
                 "--out", str(out2)]) == 0
    for fname in ("ratio.csv", "manifest.json", "summary.json"):
        assert (out1 / fname).read_bytes() == (out2 / fname).read_bytes()


def test_manifest_config_reproduces_run(tmp_path):
    cfg = _ratio_cfg()
    out1 = tmp_path / "a"
    run_ratio_experiment(cfg, str(out1))
    man = json.loads((out1 / "manifest.json").read_text())
    out2 = tmp_path / "b"
    run_ratio_experiment(man["config"], str(out2))
    assert (out1 / "ratio.csv").read_bytes() == (out2 / "ratio.csv").read_bytes()


def test_experiment_single_threshold_is_inconclusive(tmp_path):
    cfg = _write(tmp_path / "cfg.json", _ratio_cfg(u=(2.0,)))
    rc = main(["experiment", "ratio", "--config", cfg, "--threads", "1",
               "--out", str(tmp_path / "run")])
    assert rc == 3


def test_experiment_bad_config_exits_2(tmp_path, capsys):
    cfg = _write(tmp_path / "cfg.json", {"delta": 0.3, "u": [1.0]})
    rc = main(["experiment", "ratio", "--config", cfg,
               "--out", str(tmp_path / "run")])
    assert rc == 2
    assert json.loads(capsys.readouterr().err)["field"] == "model"


def test_experiment_two_cone_smoke(tmp_path):
    cfg = _write(tmp_path / "cfg.json", {
        "model": TWO_CONE_MODEL,
        "delta": 0.1,
        "theta": [{"center": [0.7, 0.3], "radius": 0.05}],
        "theta_b": [{"center": [0.3, 0.7], "radius": 0.05}],
        "u": [4.0, 8.0],
        "paths": 4000,
        "seed": 1,
    })
    out = tmp_path / "run"
    rc = main(["experiment", "two-cone", "--config", cfg, "--threads", "1",
               "--out", str(out)])
    assert rc == 0
    header, rows = _read_csv(out / "two_cone.csv")
    assert header[:2] == ["u", "asymptotic"]
    for r in rows:
        p_a, p_b, p_both = float(r[2]), float(r[5]), float(r[8])
        assert p_both <= min(p_a, p_b)
    summary = json.loads((out / "summary.json").read_text())
    assert "final_p_both_over_asym" in summary


def test_experiment_two_cone_requires_theta_b(tmp_path, capsys):
    cfg = _write(tmp_path / "cfg.json", _ratio_cfg())
    rc = main(["experiment", "two-cone", "--config", cfg,
               "--out", str(tmp_path / "run")])
    assert rc == 2
    assert json.loads(capsys.readouterr().err)["field"] == "theta_b"

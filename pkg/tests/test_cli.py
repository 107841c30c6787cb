import csv
import json

import numpy as np
import pytest

from kraichnan.cli import main


def _run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def _manifest(out):
    return json.loads((out / "manifest.json").read_text())


def _no_temp_files(out):
    return not [p for p in out.rglob("*") if p.name.endswith(".tmp")]


def test_correlation_artifacts(tmp_path, capsys):
    out = tmp_path / "corr"
    code, stdout, _ = _run(capsys, "correlation", "--grid", "16", "--tmax", "2", "--dt", "0.05",
                           "--kappa", "1e-2", "--out", str(out))
    assert code == 0
    assert {"trace.csv", "fit.json", "decay.svg", "manifest.json"} <= {p.name for p in out.iterdir()}
    fit = json.loads((out / "fit.json").read_text())
    assert fit["rate"] > 0 and fit["kappa"] == 1e-2
    with open(out / "trace.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 41 and float(rows[0]["t"]) == 0.0
    assert json.loads(stdout)["status"] == "ok"
    assert _no_temp_files(out)


def test_correlation_kappa_list(tmp_path, capsys):
    out = tmp_path / "sweep"
    code, _, _ = _run(capsys, "correlation", "--grid", "16", "--tmax", "1", "--dt", "0.05",
                      "--kappa-list", "1e-1,1e-2", "--no-plot", "--out", str(out))
    assert code == 0
    assert (out / "kappa_0.1" / "fit.json").exists() and (out / "kappa_0.01" / "fit.json").exists()
    with open(out / "summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [float(r["kappa"]) for r in rows] == [0.1, 0.01]
    # more diffusion, faster decay
    assert float(rows[0]["rate"]) > float(rows[1]["rate"])


def test_invalid_alpha_exit_2(tmp_path, capsys):
    code, _, err = _run(capsys, "correlation", "--alpha", "1.5", "--out", str(tmp_path / "x"))
    assert code == 2
    payload = json.loads(err.strip().splitlines()[-1])
    assert payload["field"] == "alpha" and payload["error"] == "config"
    # nothing computed, so no artifact directory
    assert not (tmp_path / "x").exists()


@pytest.mark.parametrize("argv,field", [
    (["mc", "--model", "bounded_shear_drift", "--alpha", "0.5"], "alpha"),
    (["mc", "--grid", "16", "--kmax", "9"], "kmax"),
    (["mc", "--eps", "0.1", "--dt", "0.03"], "dt"),
    (["sweep", "--kappa-list", "1e-3,1e-2"], "kappa_list"),
    (["verify-tensor", "--alpha", "0.5", "--beta", "0.2"], "beta"),
    (["ineq", "--suite", "hardy"], "suite"),
    (["correlation", "--kappa", "-1"], "kappa"),
])
def test_config_errors_name_field(tmp_path, capsys, argv, field):
    code, _, err = _run(capsys, *argv, "--out", str(tmp_path / "x"))
    assert code == 2
    assert json.loads(err.strip().splitlines()[-1])["field"] == field


def test_config_file_and_precedence(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("# small run\nsamples = 3\ndegree = 2\nsuite = weighted_nash\nseed = 11\n")
    out = tmp_path / "a"
    code, _, _ = _run(capsys, "ineq", "--config", str(conf), "--samples", "4", "--no-plot", "--out", str(out))
    assert code == 0
    man = _manifest(out)
    assert man["config"]["samples"] == 4  # flag beats file
    assert man["config"]["degree"] == 2 and man["seed"] == 11
    assert [p.name for p in out.glob("report_*.json")] == ["report_weighted_nash.json"]


def test_config_file_unknown_key(tmp_path, capsys):
    conf = tmp_path / "bad.conf"
    conf.write_text("colour = blue\n")
    code, _, err = _run(capsys, "ineq", "--config", str(conf), "--out", str(tmp_path / "x"))
    assert code == 2 and json.loads(err.strip().splitlines()[-1])["field"] == "colour"


def test_env_seed(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("KRAICHNAN_SEED", "42")
    args = ["ineq", "--suite", "weighted_poincare", "--samples", "3", "--degree", "2", "--no-plot"]
    assert _run(capsys, *args, "--out", str(tmp_path / "a"))[0] == 0
    assert _manifest(tmp_path / "a")["seed"] == 42
    assert _run(capsys, *args, "--seed", "7", "--out", str(tmp_path / "b"))[0] == 0
    assert _manifest(tmp_path / "b")["seed"] == 7


def test_ineq_deterministic(tmp_path, capsys):
    args = ["ineq", "--samples", "5", "--degree", "3", "--seed", "3"]
    for name in ("a", "b"):
        assert _run(capsys, *args, "--out", str(tmp_path / name))[0] == 0
    for p in (tmp_path / "a").glob("ratios_*.csv"):
        assert p.read_text() == (tmp_path / "b" / p.name).read_text()
    assert (tmp_path / "a" / "running_max.svg").exists()


def test_mc_white_cross_check(tmp_path, capsys):
    out = tmp_path / "mc"
    code, _, _ = _run(capsys, "mc", "--grid", "16", "--eps", "0.05", "--tmax", "1", "--realizations", "3",
                      "--seed", "5", "--out", str(out))
    assert code == 0
    with open(out / "correlation.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [float(r["t"]) for r in rows] == [0.5, 1.0]
    assert all(float(r["stderr"]) > 0 for r in rows)
    man = _manifest(out)
    assert man["seed"] == 5 and "correlation.csv" in man["cross_check"]
    assert {"energy.csv", "energy.svg"} <= {p.name for p in out.iterdir()}


def test_mc_seed_reproduces(tmp_path, capsys):
    args = ["mc", "--model", "oriented_shear", "--grid", "16", "--eps", "0.1", "--tmax", "0.5",
            "--realizations", "2", "--no-plot"]
    for name in ("a", "b"):
        assert _run(capsys, *args, "--out", str(tmp_path / name))[0] == 0
    assert (tmp_path / "a" / "energy.csv").read_text() == (tmp_path / "b" / "energy.csv").read_text()


def test_sweep_gap_report(tmp_path, capsys):
    out = tmp_path / "sw"
    code, _, _ = _run(capsys, "sweep", "--grid", "16", "--eps", "0.1", "--tmax", "0.5", "--realizations", "2",
                      "--kappa-list", "1e-1,1e-2,1e-3", "--out", str(out))
    assert code == 0
    gap = json.loads((out / "gap.json").read_text())
    assert gap["verdict"] in ("gap detected", "gap vanishing", "inconclusive")
    assert (out / "dissipation.svg").exists()


def test_verify_tensor_default_kappa_zero(tmp_path, capsys):
    out = tmp_path / "vt"
    code, _, _ = _run(capsys, "verify-tensor", "--grid", "16", "--kmax", "8", "--out", str(out))
    assert code == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["kappa"] == 0.0 and rep["empirical_c"] > 0
    with open(out / "beta_sweep.csv") as fh:
        betas = [float(r["beta"]) for r in csv.DictReader(fh)]
    assert betas == [0.5, 0.75, 1.0]
    assert (out / "quotient.svg").exists()


def test_nash_profile(tmp_path, capsys):
    out = tmp_path / "np"
    code, _, _ = _run(capsys, "nash-profile", "--grid", "16", "--tmax", "0.05", "--dt", "1e-3", "--out", str(out))
    assert code == 0
    data = json.loads((out / "nash.json").read_text())
    assert np.isfinite(data["slope"]) and data["slope"] < 0
    assert (out / "nash.svg").exists() and _no_temp_files(out)

import json
import subprocess
import sys

import pytest

from mptrap.cli import main, run, validate_config, ConfigError


def _strip_volatile(report):
    rep = dict(report)
    rep.pop("wall_time_s", None)
    return rep


def test_determinism(tmp_path):
    cfg = {"params": {"r_s": 1.0, "a": 0.05, "b": 0.03},
           "trapped_scan": {"n_samples": 50}}
    r1 = run("trapped-scan", cfg, str(tmp_path / "a"), seed=7)
    r2 = run("trapped-scan", cfg, str(tmp_path / "b"), seed=7)
    assert json.dumps(_strip_volatile(r1), sort_keys=True, default=float) == \
        json.dumps(_strip_volatile(r2), sort_keys=True, default=float)
    r3 = run("trapped-scan", cfg, str(tmp_path / "c"), seed=8)
    assert json.dumps(_strip_volatile(r1), sort_keys=True, default=float) != \
        json.dumps(_strip_volatile(r3), sort_keys=True, default=float)


def test_report_roundtrip(tmp_path):
    from mptrap.cli import emit
    cfg = {"params": {"a": 0.0, "b": 0.0}, "trapped_scan": {"n_samples": 20}}
    rep = run("trapped-scan", cfg, str(tmp_path), seed=1)
    path = emit(rep, str(tmp_path))
    back = json.load(open(path))
    assert back["status"] == rep["status"]
    assert back["seed"] == rep["seed"]
    assert back["rng"] == "numpy-PCG64"
    # idempotent re-emit
    path2 = emit(back, str(tmp_path))
    assert json.load(open(path2)) == back


def test_static_scan_r_trapped(tmp_path):
    cfg = {"params": {"a": 0.0, "b": 0.0}, "trapped_scan": {"n_samples": 30}}
    rep = run("trapped-scan", cfg, str(tmp_path), seed=2)
    assert rep["status"] == "pass"
    assert rep["metrics"]["static_deviation"] < 1e-12


def test_config_validation():
    with pytest.raises(ConfigError):
        validate_config({"task": "not-a-task"})
    with pytest.raises(ConfigError):
        validate_config({"bogus_key": 1})
    with pytest.raises(ConfigError):
        validate_config({"params": {"r_s": 1.0, "a": 1.2, "b": 0.4}})
    validate_config({"params": {"r_s": 1.0, "a": 0.1, "b": 0.1}})


def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"params": {"a": 1.5, "b": 0.9}}))
    rc = main(["trapped-scan", "--config", str(bad), "--out", str(tmp_path / "o")])
    assert rc == 2
    ok = tmp_path / "ok.json"
    ok.write_text(json.dumps({"params": {"a": 0.0, "b": 0.0},
                              "trapped_scan": {"n_samples": 20}}))
    rc = main(["trapped-scan", "--config", str(ok), "--out", str(tmp_path / "o"),
               "--seed", "4"])
    assert rc == 0


def test_csv_header_contracts(tmp_path):
    cfg = {"params": {"r_s": 1.0, "a": 0.05, "b": 0.03},
           "trapped_scan": {"n_samples": 20},
           "geodesic": {"span": 5.0, "trapped": False}}
    run("trapped-scan", cfg, str(tmp_path / "ts"), seed=1)
    head = (tmp_path / "ts" / "trapped_scan.csv").read_text().splitlines()[0]
    assert head == "a,b,tau,Phi,Psi,r_trapped,dR_dr,newton_iters"
    run("geodesic", cfg, str(tmp_path / "geo"), seed=1)
    head = (tmp_path / "geo" / "trajectory.csv").read_text().splitlines()[0]
    assert head == "lambda,t,r,theta,phi,psi,tau,xi,Theta,Phi,Psi,p_residual,K_drift"


def test_console_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "mptrap.cli", "trapped-scan", "--out",
         str(tmp_path), "--seed", "5"],
        capture_output=True, text=True,
        env={"PATH": "/usr/bin:/bin", "PYTHONPATH": ":".join(sys.path)})
    assert out.returncode == 0
    assert "trapped-scan: pass" in out.stdout

import json
import subprocess
import sys

import numpy as np
import pytest

from trimturnpike import cli, problems
from trimturnpike.pmp import optimal_feedback


def run_cli(args):
    return cli.main(list(args))


def _read_csv(path):
    raw = path.read_bytes().decode("utf-8")
    assert raw.endswith("\r\n")  # RFC 4180 line endings
    lines = raw.strip().split("\r\n")
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


def test_solve_writes_trajectory_and_solution(tmp_path):
    rc = run_cli(["solve", "--problem", "lq", "--T", "15", "--grid", "150",
                  "--out", str(tmp_path)])
    assert rc == 0
    header, rows = _read_csv(tmp_path / "trajectory.csv")
    assert header == ["t", "x_1", "y_1", "px_1", "u_1"]
    assert len(rows) == 151
    sol = json.loads((tmp_path / "solution.json").read_text())
    assert sol["problem"] == "lq"
    assert sol["residual_norm"] <= 1e-9


def test_csv_roundtrip_recomputes_control(tmp_path):
    rc = run_cli(["solve", "--problem", "lq", "--T", "15", "--grid", "100",
                  "--out", str(tmp_path)])
    assert rc == 0
    _, rows = _read_csv(tmp_path / "trajectory.csv")
    sol = json.loads((tmp_path / "solution.json").read_text())
    lam = np.array(sol["lambda"])
    prob = problems.lq_problem(T=15.0)
    for row in rows[:: 10]:
        x = np.array([float(row[1])])
        px = np.array([float(row[3])])
        u = float(row[4])
        u_re = optimal_feedback(prob, x, px, lam)[0]
        assert abs(u - u_re) <= 1e-9


def test_json_output_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run_cli(["solve", "--problem", "lq", "--T", "15", "--grid", "100",
                        "--out", str(out)]) == 0
    ja = (a / "solution.json").read_bytes()
    jb = (b / "solution.json").read_bytes()
    # timings differ between runs; everything else must be byte-identical
    da, db = json.loads(ja), json.loads(jb)
    da.pop("timings"), db.pop("timings")
    assert json.dumps(da, sort_keys=True) == json.dumps(db, sort_keys=True)
    ca = (a / "trajectory.csv").read_bytes()
    cb = (b / "trajectory.csv").read_bytes()
    assert ca == cb


def test_certify_writes_certificate(tmp_path):
    rc = run_cli(["certify", "--problem", "lq", "--T", "40", "--grid", "400",
                  "--out", str(tmp_path)])
    assert rc == 0
    cert = json.loads((tmp_path / "certificate.json").read_text())
    assert cert["hyperbolic"] is True
    assert cert["mu_star"] == pytest.approx(1.0, abs=1e-6)
    assert cert["mu_fit"] == pytest.approx(1.0, rel=0.1)
    assert len(cert["eigenvalues"]) == 2
    header, rows = _read_csv(tmp_path / "deviation.csv")
    assert header == ["t", "dev_x", "dev_u", "dev_y", "envelope"]
    assert len(rows) == 401


def test_certify_nonhyperbolic_exit_code(tmp_path, monkeypatch):
    from trimturnpike import steady as steady_mod

    real = steady_mod.check_hyperbolicity

    def doctored(problem, sp):
        rep = real(problem, sp)
        return steady_mod.HyperbolicityReport(
            matrix=rep.matrix, spectrum=rep.spectrum, hyperbolic=False, mu_star=0.0
        )

    monkeypatch.setattr(steady_mod, "check_hyperbolicity", doctored)
    rc = run_cli(["certify", "--problem", "lq", "--T", "20", "--grid", "100",
                  "--out", str(tmp_path)])
    assert rc == 3
    cert = json.loads((tmp_path / "certificate.json").read_text())
    assert cert["hyperbolic"] is False
    assert cert["C_fit"] is None
    assert not (tmp_path / "deviation.csv").exists()


def test_malformed_config_exit_code(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"problem": "lq", "nonsense": 1}))
    rc = run_cli(["solve", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 1


def test_config_unknown_key_rejected(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"problem": "lq", "solver": {"bogus": 3}}))
    rc = run_cli(["solve", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 1


def test_config_merges_with_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "problem": "lq",
        "boundary": {"T": 15.0},
        "solver": {"nodes": 6},
        "grid": 80,
    }))
    out = tmp_path / "out"
    rc = run_cli(["solve", "--config", str(cfg), "--T", "12", "--out", str(out)])
    assert rc == 0
    sol = json.loads((out / "solution.json").read_text())
    assert sol["T"] == 12.0
    assert sol["grid"] == 80


def test_unknown_problem_rejected(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"problem": "pendulum"}))
    assert run_cli(["solve", "--config", str(cfg), "--out", str(tmp_path)]) == 1


def test_sweep_requires_two_horizons(tmp_path):
    rc = run_cli(["sweep", "--problem", "lq", "--T-list", "20",
                  "--out", str(tmp_path)])
    assert rc == 1


def test_sweep_lq(tmp_path):
    rc = run_cli(["sweep", "--problem", "lq", "--T-list", "15,20,25",
                  "--grid", "300", "--out", str(tmp_path)])
    assert rc == 0
    header, rows = _read_csv(tmp_path / "sweep.csv")
    assert header == ["T", "lambda_1", "xbar_1", "mu_fit", "C_fit", "status"]
    assert len(rows) == 3
    assert all(r[-1] == "ok" for r in rows)
    lam = [float(r[1]) for r in rows]
    approx = [problems.lq_lambda_approx(T=T) for T in (15.0, 20.0, 25.0)]
    assert np.max(np.abs(np.array(lam) - approx)) < 1e-3


def test_console_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "trimturnpike.cli", "--help"],
        capture_output=True, text=True,
    )
    assert out.returncode == 0
    assert "solve" in out.stdout and "certify" in out.stdout and "sweep" in out.stdout

import csv
import io
import json
import math
import shutil
import subprocess

import numpy as np
import pytest

from qcm.channels import affine_closed_form
from qcm.cli import EXIT_DOMAIN, EXIT_OK, EXIT_USAGE, run
from qcm.cloner import ParamSet
from qcm.design import universal_angles

PI = math.pi


def _json(argv):
    code, out = run(argv + ["--format", "json"])
    assert code == EXIT_OK
    return json.loads(out)


def test_design_universal_json():
    rec = _json(["design", "--case", "universal", "--p", "0.5"])
    assert rec["f_a"] == pytest.approx(5 / 6, abs=1e-15)
    assert rec["f_b"] == pytest.approx(5 / 6, abs=1e-15)
    assert rec["channel_id"] == "Depolarizing"
    assert set(rec["omega"]) == {"alpha", "alpha_tilde", "beta", "beta_tilde", "gamma", "gamma_tilde"}
    assert set(rec["copy_a"]) == {"eta_x", "eta_y", "eta_z", "delta_z"}
    assert rec["classification"] == "phase-independent, centered"


def test_json_floats_roundtrip_exactly():
    from qcm.design import design_universal

    rec = _json(["design", "--case", "universal", "--p", "0.3"])
    r = design_universal(0.3)
    assert rec["f_a"] == r.f_a and rec["residual"] == r.residual
    assert rec["omega"]["alpha"] == r.omega.alpha
    assert rec["weight"] == r.weight


def test_design_two_state_text():
    code, out = run(["design", "--case", "two-state", "--overlap", "0.5"])
    assert code == EXIT_OK
    fields = dict(line.split(None, 1) for line in out.splitlines())
    assert float(fields["f_a"]) == pytest.approx(0.987139, abs=1e-6)


def test_design_fixed_theta_known_state():
    rec = _json(["design", "--case", "fixed-theta", "--theta", "0", "--p", "0.3"])
    assert rec["f_a"] == pytest.approx(1, abs=1e-12) and rec["f_b"] == pytest.approx(1, abs=1e-12)


def test_design_fixed_theta_reflects_southern_angle():
    south = _json(["design", "--case", "fixed-theta", "--theta", str(PI - 0.6)])
    north = _json(["design", "--case", "fixed-theta", "--theta", "0.6"])
    assert south["diagnostics"]["reflected"] is True
    assert north["diagnostics"]["reflected"] is False
    assert south["f_a"] == north["f_a"]


def test_design_degrees():
    a = _json(["design", "--case", "mirror-pc", "--theta", "90", "--degrees"])
    b = _json(["design", "--case", "mirror-pc", "--theta", str(PI / 2)])
    assert a["f_a"] == pytest.approx(b["f_a"], abs=1e-15)


def test_design_numeric_with_moments():
    rec = _json(["design", "--case", "numeric", "--moments", "0,0.5,0.5,0", "--p", "0.8", "--budget", "8"])
    assert rec["f_a"] == pytest.approx(0.5 * (1 + 0.8 / math.sqrt(0.68)), abs=1e-6)
    assert rec["channel_id"] == "Generic"


def test_design_with_ensemble_file(tmp_path):
    f = tmp_path / "ens.json"
    f.write_text(json.dumps({"variant": "uniform_sphere"}))
    rec = _json(["design", "--case", "centered-symmetric", "--ensemble", str(f)])
    assert rec["f_a"] == pytest.approx(5 / 6, abs=1e-12)


def test_design_csv_single_row():
    code, out = run(["design", "--case", "phase-covariant", "--format", "csv"])
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and len(rows) == 1
    assert float(rows[0]["f_a"]) == pytest.approx(0.5 * (1 + 1 / math.sqrt(2)))


@pytest.mark.parametrize(
    "argv, code",
    [
        (["design", "--case", "two-state", "--overlap", "1.0"], EXIT_DOMAIN),
        (["design", "--case", "universal", "--p", "1.5"], EXIT_DOMAIN),
        (["design", "--case", "fixed-theta", "--theta", "4"], EXIT_DOMAIN),
        (["design", "--case", "two-state-weighted", "--k", "0.7"], EXIT_DOMAIN),
        (["design", "--case", "two-state"], EXIT_USAGE),
        (["design", "--case", "bogus"], EXIT_USAGE),
        (["design", "--case", "numeric", "--moments", "1,2"], EXIT_USAGE),
        (["design", "--case", "numeric", "--moments", "0.1,0.5,0.6,0.3"], EXIT_DOMAIN),
        (["simulate", "--omega", "1,2,3", "--state", "0,0"], EXIT_USAGE),
        (["simulate", "--omega", "0,0,0,0,0,0", "--state", "5,0"], EXIT_DOMAIN),
        (["sweep", "--case", "universal", "--p-grid", "0"], EXIT_USAGE),
        (["moments", "--ensemble", "/nonexistent.json"], EXIT_USAGE),
        ([], EXIT_USAGE),
    ],
)
def test_exit_codes(argv, code, capsys):
    assert run(argv)[0] == code


def _simulate(omega, state):
    rows = _json(["simulate", "--omega", ",".join(map(repr, omega)), "--state", ",".join(map(repr, state))])
    return {r["copy"]: r for r in rows}


def test_simulate_identity_for_copy_a():
    omega = (0.0, PI, 0.0, 0.0, 0.0, 0.0)
    th, ph = PI / 3, 1.0
    rows = _simulate(omega, (th, ph))
    n = np.array([math.sin(th) * math.cos(ph), -math.sin(th) * math.sin(ph), math.cos(th)])
    for copy in "AB":
        want = affine_closed_form(ParamSet(*omega), copy).apply(n)
        got = [rows[copy][k] for k in ("r_x", "r_y", "r_z")]
        assert np.allclose(got, want, atol=1e-12)
    assert rows["A"]["fidelity"] == pytest.approx(1, abs=1e-12)
    assert [rows["B"][k] for k in ("r_x", "r_y", "r_z")] == pytest.approx([0, 0, 1], abs=1e-12)


@pytest.mark.parametrize("state", [(0.0, 0.0), (1.0, 2.0), (PI / 2, 0.3), (2.9, 5.0)])
def test_simulate_universal(state):
    a, g = universal_angles(0.5)
    rows = _simulate((a, a, 0.0, 0.0, g, g), state)
    assert rows["A"]["fidelity"] == pytest.approx(5 / 6, abs=1e-12)
    assert rows["B"]["fidelity"] == pytest.approx(5 / 6, abs=1e-12)


def test_simulate_damping_fixed_point():
    rows = _simulate((0.0, PI, 0.0, 0.0, PI / 2, PI / 2), (0.0, 0.0))
    assert [rows["A"][k] for k in ("r_x", "r_y", "r_z")] == pytest.approx([0, 0, 1], abs=1e-12)


@pytest.mark.parametrize("case", ["universal", "phase-covariant"])
def test_sweep_csv(case):
    code, out = run(["sweep", "--case", case, "--p-grid", "5", "--format", "csv"])
    assert code == EXIT_OK
    lines = out.split("\n")
    assert lines[0] == "p,f_a,f_b,residual"
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 6
    assert [float(r["p"]) for r in rows] == pytest.approx([i / 5 for i in range(6)])
    assert "\r" not in out


def test_sweep_fixed_theta_needs_theta():
    assert run(["sweep", "--case", "fixed-theta"])[0] == EXIT_USAGE
    code, out = run(["sweep", "--case", "fixed-theta", "--theta", "1.0", "--p-grid", "2"])
    assert code == EXIT_OK and len(out.strip().splitlines()) == 4


def test_moments_side_by_side(tmp_path):
    f = tmp_path / "ens.json"
    f.write_text(json.dumps({"variant": "two_state", "overlap": 0.5, "weight": 0.2}))
    rows = _json(["moments", "--ensemble", str(f)])
    assert [r["moment"] for r in rows] == ["nz_bar", "nx2_bar", "ny2_bar", "nz2_bar"]
    assert all(r["abs_diff"] < 1e-12 for r in rows)


def test_verify_quick_passes():
    code, out = run(["verify", "--suite", "quick"])
    assert code == EXIT_OK
    assert "checks passed" in out and "FAIL" not in out


def test_commands_are_deterministic():
    argv = ["design", "--case", "numeric", "--moments", "0.3,0.5,0.2,0.3", "--p", "0.4", "--budget", "6"]
    assert run(argv) == run(argv)


@pytest.mark.skipif(shutil.which("qcm") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(
        ["qcm", "design", "--case", "universal", "--format", "json"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["f_a"] == pytest.approx(5 / 6, abs=1e-15)

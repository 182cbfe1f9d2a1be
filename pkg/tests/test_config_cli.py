import io
import json
import math

import numpy as np
import pytest

from rotrad.cli import EXIT_CONFIG, EXIT_IDENTITY, EXIT_NONCONVERGED, EXIT_OK, TRAJECTORY_COLUMNS, main
from rotrad.config import ConfigError, apply_override, load_config
from rotrad.dynamics import PowerLawHeatCapacity
from rotrad.kernels import angular_weight
from rotrad.quadrature import radiation_integrals
from rotrad.spectra import read_series
from rotrad.units import CGS


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def read_trajectory(text):
    rows = [ln for ln in text.splitlines() if not ln.startswith("#")]
    assert rows[0].split(",") == list(TRAJECTORY_COLUMNS)
    return np.array([[float(v) for v in r.split(",")] for r in rows[1:]]).reshape(-1, len(TRAJECTORY_COLUMNS))


# configuration ---------------------------------------------------------------


def test_defaults_load():
    cfg = load_config()
    assert cfg.state.beta == 0.5 and cfg.env.T2 == 0.0
    assert cfg.params.is_cold


def test_override_parses_json_values():
    data = {}
    apply_override(data, "motion.beta=0.3")
    apply_override(data, 'response.magnetic={"type": "zero"}')
    apply_override(data, "spectrum.kind=angular")
    assert data == {"motion": {"beta": 0.3}, "response": {"magnetic": {"type": "zero"}},
                    "spectrum": {"kind": "angular"}}


def test_override_needs_assignment():
    with pytest.raises(ConfigError, match="KEY=VALUE"):
        apply_override({}, "motion.beta")


@pytest.mark.parametrize("override, fragment", [
    ("motion.betta=0.3", "unknown key 'motion.betta'"),
    ("particles.mass_g=1", "unknown key 'particles'"),
    ("motion.beta=true", "motion.beta: expected a number"),
    ("motion.beta=1.0", "beta"),
    ("particle.theta_rad=4", "theta_rad must lie in"),
    ("particle.T1_K=-1", "T1"),
    ("quadrature.max_depth=2.5", "expected an integer"),
    ("quadrature.rel_tol=abc", "quadrature.rel_tol"),
    ("spectrum.kind=polar", "spectrum.kind"),
    ("output.format=xml", "output.format"),
    ("verify.oracle_scope=some", "oracle_scope"),
    ('response.electric={"type": "lorentz", "alpha0_cm3": 1e-21}', "missing keys"),
    ('evolve.heat_capacity={"type": "constant", "C_erg_per_K": 0}', "positive"),
])
def test_invalid_overrides_name_the_key(override, fragment):
    with pytest.raises(ConfigError, match=fragment):
        load_config(None, [override])


def test_power_law_heat_capacity():
    cfg = load_config(None, ['evolve.heat_capacity={"type": "power_law", "C0_erg_per_K": 1e-12, '
                             '"T_ref_K": 300, "exponent": 3}'])
    assert isinstance(cfg.heat_capacity, PowerLawHeatCapacity)


def test_json_error_reports_line(tmp_path):
    path = tmp_path / "run.json"
    path.write_text('{\n  "motion": {\n    "beta": \n  }\n}\n')
    with pytest.raises(ConfigError, match=r"run\.json:4:3"):
        load_config(path)


def test_yaml_error_reports_line(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("motion:\n  beta: 0.3\nparticle: [1, 2\n")
    with pytest.raises(ConfigError, match=r"run\.yaml:\d+:\d+"):
        load_config(path)


def test_yaml_file_with_relative_table(tmp_path):
    w = np.geomspace(1e11, 1e15, 16)
    np.savetxt(tmp_path / "alpha.csv", np.column_stack([w, 1e-21 * w / 1e13 / (1 + (w / 1e13) ** 2)]),
               delimiter=",")
    (tmp_path / "run.yaml").write_text(
        "motion: {beta: 0.2}\nresponse:\n  electric: {type: tabulated, path: alpha.csv}\n")
    cfg = load_config(tmp_path / "run.yaml")
    assert cfg.state.beta == 0.2
    assert len(cfg.response.features()) >= 16


def test_missing_config_file(tmp_path):
    code, _, err = run("compute", "--config", str(tmp_path / "nope.json"))
    assert code == EXIT_CONFIG and "cannot read config" in err


# compute ---------------------------------------------------------------------


def test_compute_cold_spinning_force_intensity():
    code, out, _ = run("compute")
    assert code == EXIT_OK
    data = json.loads(out)
    I = data["I_erg_s"]["value"]
    I0 = data["zero_T_intensity_erg_s"]["value"]
    F = data["F_x_dyn"]["value"]
    assert I == pytest.approx(I0, rel=1e-5)
    assert F == pytest.approx(-0.5 / CGS.c * I0, rel=1e-5)
    assert data["converged"] is True
    assert data["energy_balance_residual"] < 1e-5


def test_compute_equilibrium_is_zero():
    code, out, _ = run("compute", "--set", "motion.beta=0", "--set", "particle.Omega_rad_s=0",
                       "--set", "particle.T1_K=300", "--set", "background.T2_K=300")
    data = json.loads(out)
    assert code == EXIT_OK
    assert data["F_x_dyn"]["value"] == data["Q_dot_erg_s"]["value"] == data["I_erg_s"]["value"] == 0.0
    assert data["energy_balance_residual"] == 0.0


def test_compute_nonconverged_exit_2():
    radiation_integrals.cache_clear()
    code, out, _ = run("compute", "--set", "particle.T1_K=300", "--set", "background.T2_K=600",
                       "--set", 'response.electric={"type": "lorentz", "alpha0_cm3": 1e-21, '
                       '"omega0_rad_s": 2e13, "gamma_d_rad_s": 1e9}',
                       "--set", "quadrature.max_depth=4")
    data = json.loads(out)
    assert code == EXIT_NONCONVERGED
    assert data["converged"] is False
    assert math.isfinite(data["I_erg_s"]["value"])


def test_compute_unknown_key_exit_1():
    code, out, err = run("compute", "--set", "motion.speed=0.1")
    assert code == EXIT_CONFIG and out == ""
    assert "unknown key 'motion.speed'" in err


def test_bad_flag_exit_1():
    code, _, _ = run("compute", "--format", "xml")
    assert code == EXIT_CONFIG


def test_compute_writes_file(tmp_path):
    target = tmp_path / "out.json"
    code, out, _ = run("compute", "--output", str(target))
    assert code == EXIT_OK and out == ""
    assert "F_x_dyn" in json.loads(target.read_text())


# spectrum --------------------------------------------------------------------


def test_spectrum_cold_rest_angular_shape(tmp_path):
    target = tmp_path / "ang.csv"
    theta = 0.4
    code, _, _ = run("spectrum", "--kind", "angular", "--output", str(target),
                     "--set", "motion.beta=0", "--set", f"particle.theta_rad={theta}",
                     "--set", "spectrum.points=257")
    assert code == EXIT_OK
    s = read_series(target)
    mid = s.density[s.abscissa.size // 2]
    ref = angular_weight(0.0, s.abscissa, theta) / angular_weight(0.0, 0.0, theta)
    assert np.max(np.abs(s.density / mid - ref)) < 1e-6


def test_spectrum_equilibrium_zero():
    code, out, _ = run("spectrum", "--set", "motion.beta=0", "--set", "particle.Omega_rad_s=0",
                       "--set", "spectrum.points=16", "--format", "json")
    data = json.loads(out)
    assert code == EXIT_OK
    assert all(v == 0.0 for v in data["density"])


def test_spectrum_bad_path_exit_1(tmp_path):
    code, _, err = run("spectrum", "--set", "spectrum.points=16",
                       "--output", str(tmp_path / "missing" / "s.csv"))
    assert code == EXIT_CONFIG and "missing" in err


# evolve ----------------------------------------------------------------------


def test_evolve_cold_beta_constant():
    code, out, _ = run("evolve", "--set", "evolve.t_span_s=1.0")
    assert code == EXIT_OK
    tr = read_trajectory(out)
    assert tr.shape[0] > 2
    assert np.max(np.abs(tr[:, 1] - 0.5)) < 1e-9


def test_evolve_thermalization_monotone():
    code, out, _ = run("evolve", "--set", "motion.beta=0", "--set", "particle.Omega_rad_s=0",
                       "--set", "particle.T1_K=100", "--set", "background.T2_K=300",
                       "--set", "evolve.t_span_s=5",
                       "--set", 'evolve.heat_capacity={"type": "constant", "C_erg_per_K": 1e-15}')
    assert code == EXIT_OK
    T1 = read_trajectory(out)[:, 3]
    assert (np.diff(T1) >= 0).all()
    assert T1[-1] <= 300.0
    assert T1[-1] > 100.0


def test_evolve_zero_span_single_row(tmp_path):
    target = tmp_path / "traj.json"
    code, _, _ = run("evolve", "--set", "evolve.t_span_s=0", "--output", str(target))
    data = json.loads(target.read_text())
    assert code == EXIT_OK
    assert data["status"] == "ok" and len(data["t"]) == 1


# verify ----------------------------------------------------------------------


def test_verify_tightened_tolerance_fails_with_measurement():
    code, out, _ = run("verify", "--set", "verify.energy_balance_tol=1e-20")
    assert code == EXIT_IDENTITY
    line = next(ln for ln in out.splitlines() if " energy_balance " in ln)
    assert line.startswith("FAIL")
    measured = float(line.split()[2])
    assert 0 < measured < 1e-5
    assert out.splitlines()[-1] == "failed: energy_balance"


def test_verify_json_format():
    code, out, _ = run("verify", "--format", "json")
    assert code == EXIT_OK
    names = [r["name"] for r in json.loads(out)]
    assert "energy_balance" in names and "oracle_agreement" in names


@pytest.fixture()
def negative_table(tmp_path):
    w = np.geomspace(1e11, 1e15, 24)
    u = w / 2e13
    a = 1e-21 * 0.5 * u / ((1 - u * u) ** 2 + 0.25 * u * u)
    a[12] = -1e-23
    path = tmp_path / "broken.csv"
    np.savetxt(path, np.column_stack([w, a]), delimiter=",")
    return path


def test_verify_fault_injection_exit_3(negative_table):
    spec = json.dumps({"type": "tabulated", "path": str(negative_table)})
    code, out, _ = run("verify", "--set", f"response.electric={spec}")
    assert code == EXIT_IDENTITY
    line = next(ln for ln in out.splitlines() if " passivity " in ln)
    assert line.startswith("FAIL")
    assert "passivity" in out.splitlines()[-1]

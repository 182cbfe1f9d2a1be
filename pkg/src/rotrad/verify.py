"""Identity suite behind ``rotrad verify``.

Each check evaluates one exact relation of the theory on its own parameter
lattice and reports the worst measured deviation against a threshold. The
report contains no timings or addresses, so repeated runs print the same
bytes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .dynamics import SolverConfig, evolve
from .fdt import FdtContext, RotationSpec, rotation_matrix, spectral_weight_trace
from .kernels import KinematicParams
from .quadrature import (QuadratureConfig, dense_oracle_all, radiation_integrals, zero_T_force,
                         zero_T_intensity)
from .response import Lorentz, ParticleResponse, PowerLaw, validate_model
from .state import Environment, ParticleState
from .units import CGS

__all__ = [
    "CheckResult",
    "DEFAULT_THRESHOLDS",
    "LATTICE_BETA",
    "LATTICE_THETA",
    "LATTICE_TEMPS",
    "LATTICE_OMEGA",
    "lattice_cases",
    "universality_cases",
    "theta_cases",
    "reduction_cases",
    "oracle_cases",
    "reduction_oracle",
    "oracle_deviation",
    "run_suite",
    "format_report",
]

LATTICE_BETA = (0.0, 0.3, 0.8)
LATTICE_THETA = (0.0, math.pi / 4, math.pi / 2)
LATTICE_TEMPS = ((0.0, 300.0), (300.0, 0.0), (300.0, 600.0))
LATTICE_OMEGA = (0.0, 1e10, 1e12)
COLD_BETA = (0.0, 0.5, 0.9)
COLD_OMEGA = 1e12
THETA_SAMPLES = (0.0, math.pi / 6, math.pi / 4, math.pi / 3, math.pi / 2, 2 * math.pi / 3, math.pi)
REDUCTION_TEMPS = ((0.0, 300.0), (300.0, 0.0), (300.0, 600.0), (100.0, 300.0))

DEFAULT_THRESHOLDS = {
    "energy_balance_tol": 1e-5,
    "universality_tol": 1e-5,
    "closed_form_tol": 1e-8,
    "shared_force_tol": 1e-12,
    "full_force_tol": 1e-5,
    "theta_spread_tol": 1e-6,
    "reduction_tol": 1e-6,
    "oracle_tol": 1e-4,
    "oracle_grid": 2048,
    "oracle_scope": "sample",
    "fdt_trace_tol": 1e-13,
    "rotation_tol": 1e-12,
    "drift_tol": 1e-9,
    "identity_tol": 1e-8,
    "audit_tol": 1e-4,
    "dynamics_steps": 10000,
    "seed": 20240601,
}


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    threshold: float
    passed: bool
    detail: str = ""


def _check(name, measured, threshold, detail="", converged=True):
    ok = bool(converged and np.isfinite(measured) and measured < threshold)
    if not converged:
        detail = (detail + "; " if detail else "") + "quadrature not converged"
    return CheckResult(name, float(measured), float(threshold), ok, detail)


# parameter sets ---------------------------------------------------------------


def lattice_cases(response):
    """The 3x3x3x3 energy-balance lattice in fixed order."""
    return [KinematicParams(b, th, Om, T1, T2, response)
            for b in LATTICE_BETA for th in LATTICE_THETA for (T1, T2) in LATTICE_TEMPS for Om in LATTICE_OMEGA]


def universality_cases(response, Omega=COLD_OMEGA):
    return [KinematicParams(b, th, Omega, 0.0, 0.0, response) for b in COLD_BETA for th in LATTICE_THETA]


def theta_cases(response):
    """Groups of parameter sets that differ only in ``theta``: ``beta = 0``
    at several spins and temperatures, and ``Omega = 0`` in motion."""
    groups = []
    for T1, T2 in LATTICE_TEMPS:
        for Om in (1e10, 1e12):
            groups.append([KinematicParams(0.0, th, Om, T1, T2, response) for th in THETA_SAMPLES])
        for b in (0.3, 0.8):
            groups.append([KinematicParams(b, th, 0.0, T1, T2, response) for th in THETA_SAMPLES])
    groups.append([KinematicParams(0.0, th, COLD_OMEGA, 0.0, 0.0, response) for th in THETA_SAMPLES])
    return groups


def reduction_cases(response):
    return [KinematicParams(0.0, math.pi / 4, 0.0, T1, T2, response) for T1, T2 in REDUCTION_TEMPS]


def oracle_cases(response, scope="sample"):
    """Cases checked against the tensor-grid oracle.

    ``"all"`` covers every case of the other checks; ``"sample"`` keeps one
    representative per regime.
    """
    if scope == "all":
        cases = lattice_cases(response) + universality_cases(response)
        for g in theta_cases(response):
            cases += g
        cases += reduction_cases(response)
    else:
        pi4 = math.pi / 4
        cases = [
            KinematicParams(0.3, math.pi / 3, 1e10, 0.0, 300.0, response),
            KinematicParams(0.8, pi4, 1e12, 300.0, 600.0, response),
            KinematicParams(0.3, 0.0, 0.0, 300.0, 0.0, response),
            KinematicParams(0.0, math.pi / 2, 1e12, 0.0, 300.0, response),
            KinematicParams(0.9, pi4, COLD_OMEGA, 0.0, 0.0, response),
            KinematicParams(0.0, pi4, 0.0, 100.0, 300.0, response),
        ]
    seen, out = set(), []
    for p in cases:
        key = (p.beta, p.theta, p.Omega, p.T1, p.T2)
        if key not in seen:
            seen.add(key)
            out.append(p)
    return out


# independent references -------------------------------------------------------


def _coth_or_sign(z):
    return 1.0 / np.tanh(z) if math.isfinite(z) else 1.0


def reduction_oracle(response, T1, T2, constants=CGS):
    """``(2 hbar / pi c^3) int_0^inf w^4 a''(w) [coth(w/2w2) - coth(w/2w1)] dw``
    with ``scipy.integrate.quad``; the rest-frame, non-spinning limit."""
    k = constants
    w1, w2 = k.k_B * T1 / k.hbar, k.k_B * T2 / k.hbar
    w_ref = max(w1, w2)
    a_ref = response.magnitude()

    def f(u):
        c2 = _coth_or_sign(u / (2 * w2 / w_ref)) if w2 > 0 else 1.0
        c1 = _coth_or_sign(u / (2 * w1 / w_ref)) if w1 > 0 else 1.0
        return u**4 * float(response.alpha_im(u * w_ref)) / a_ref * (c2 - c1)

    cuts = sorted({0.0, *(fe / w_ref for fe in response.features() if fe / w_ref < 80.0), 80.0})
    # relative accuracy 1e-12 is out of reach on panels where the integrand
    # is tiny; the check compares totals, so quad's warning is not useful
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        total = sum(quad(f, lo, hi, epsabs=0.0, epsrel=1e-12, limit=400)[0] for lo, hi in zip(cuts[:-1], cuts[1:]))
        total += quad(f, cuts[-1], math.inf, epsabs=0.0, epsrel=1e-12, limit=400)[0]
    return 2 * k.hbar / (math.pi * k.c**3) * w_ref**5 * a_ref * total


def oracle_deviation(p, cfg: QuadratureConfig, grid_n: int):
    """Largest relative gap between adaptive and oracle values of the three
    integrals. A vanishing force (``beta = 0``) is measured against
    ``1e-10 max(|Qdot|, |I|) / c``."""
    res = radiation_integrals(p, cfg)
    orc = dense_oracle_all(p, grid_n, cfg.cutoff_multiplier)
    ada = (res.force.value, res.heating.value, res.intensity.value)
    scale = max(abs(ada[1]), abs(ada[2]))
    floors = (1e-10 * scale / p.constants.c, 1e-10 * scale, 1e-10 * scale)
    dev = 0.0
    for a, o, fl in zip(ada, orc, floors):
        den = max(abs(a), abs(o), fl)
        if den > 0:
            dev = max(dev, abs(a - o) / den)
    return dev, res.converged


# checks -----------------------------------------------------------------------


def check_passivity(response):
    omega_max = 100.0 * max((*response.features(), CGS.k_B * 600.0 / CGS.hbar, COLD_OMEGA))
    rep = validate_model(response, omega_max)
    return CheckResult("passivity", 0.0 if rep.ok else 1.0, 0.5, rep.ok, rep.message)


def check_energy_balance(response, cfg, tol):
    worst, conv, where = 0.0, True, ""
    for p in lattice_cases(response):
        r = radiation_integrals(p, cfg)
        conv &= r.converged
        if r.energy_balance_residual >= worst:
            worst = r.energy_balance_residual
            where = f"beta={p.beta:g} theta={p.theta:.4f} T1={p.T1:g} T2={p.T2:g} Omega={p.Omega:g}"
    return _check("energy_balance", worst, tol, f"81 cases; worst at {where}", conv)


def check_universality(response, cfg, tol):
    I0 = zero_T_intensity(response, COLD_OMEGA, cfg)
    worst, conv = 0.0, I0.converged
    for p in universality_cases(response):
        r = radiation_integrals(p, cfg)
        conv &= r.converged
        worst = max(worst, abs(r.intensity.value / I0.value - 1.0))
    return _check("zero_T_universality", worst, tol, f"I0={I0.value:.10e} erg/s", conv)


def check_closed_form(cfg, tol):
    kappa = 1e-35
    resp = ParticleResponse(PowerLaw(kappa, 1))
    worst, conv = 0.0, True
    for Om in (1e11, 1e12, 1e13):
        I0 = zero_T_intensity(resp, Om, cfg)
        exact = 2 * CGS.hbar * kappa * Om**6 / (45 * math.pi * CGS.c**3)
        conv &= I0.converged
        worst = max(worst, abs(I0.value / exact - 1.0))
    return _check("closed_form_power_law", worst, tol, "Omega in {1e11, 1e12, 1e13}", conv)


def check_shared_force(response, cfg, tol):
    I0 = zero_T_intensity(response, COLD_OMEGA, cfg)
    worst = 0.0
    for b in (0.3, 0.5, 0.9):
        F0 = zero_T_force(response, COLD_OMEGA, b, cfg)
        ref = b / CGS.c * I0.value
        worst = max(worst, abs(F0.value + ref) / abs(ref))
    return _check("force_intensity_shared", worst, tol, "", I0.converged)


def check_full_force(response, cfg, tol):
    I0 = zero_T_intensity(response, COLD_OMEGA, cfg)
    worst, conv = 0.0, I0.converged
    for p in universality_cases(response):
        if p.beta == 0:
            continue
        r = radiation_integrals(p, cfg)
        conv &= r.converged
        ref = -p.beta / CGS.c * I0.value
        worst = max(worst, abs(r.force.value - ref) / abs(ref))
    return _check("force_intensity_full", worst, tol, "", conv)


def check_theta_independence(response, cfg, tol):
    worst, conv = 0.0, True
    for group in theta_cases(response):
        rows = []
        for p in group:
            r = radiation_integrals(p, cfg)
            conv &= r.converged
            rows.append((r.force.value, r.heating.value, r.intensity.value))
        rows = np.array(rows)
        for col in rows.T:
            top = np.max(np.abs(col))
            if top > 0:
                worst = max(worst, float((col.max() - col.min()) / top))
    return _check("theta_independence", worst, tol, "beta=0 and Omega=0 groups", conv)


def check_reduction(response, cfg, tol):
    worst, conv = 0.0, True
    for p in reduction_cases(response):
        r = radiation_integrals(p, cfg)
        conv &= r.converged
        ref = reduction_oracle(response, p.T1, p.T2, p.constants)
        worst = max(worst, abs(r.heating.value - ref) / abs(ref))
    return _check("reduction_oracle", worst, tol, "", conv)


def check_oracle(response, cfg, tol, grid_n, scope):
    worst, conv = 0.0, True
    cases = oracle_cases(response, scope)
    for p in cases:
        dev, ok = oracle_deviation(p, cfg, grid_n)
        conv &= ok
        worst = max(worst, dev)
    return _check("oracle_agreement", worst, tol, f"{len(cases)} cases, grid {grid_n}", conv)


def check_fdt(response, seed, trace_tol, rot_tol):
    rng = np.random.default_rng(seed)
    rot = 0.0
    for _ in range(1000):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        A = rotation_matrix(RotationSpec(tuple(n), rng.uniform(-10, 10)))
        rot = max(rot, np.abs(A.T @ A - np.eye(3)).max(), np.abs(A @ n - n).max())
    trace = 0.0
    for model in (response.electric, response.magnetic):
        for _ in range(50):
            Om = 10 ** rng.uniform(9, 14)
            T1 = (0.0, 300.0)[rng.integers(2)]
            omega = np.sort(rng.uniform(-1e14, 1e14, 64))
            ref = spectral_weight_trace(omega, FdtContext(0.0, Om, T1, model))
            top = np.max(np.abs(ref))
            if top == 0:
                continue
            for th in THETA_SAMPLES[1:]:
                tr = spectral_weight_trace(omega, FdtContext(th, Om, T1, model))
                trace = max(trace, float(np.max(np.abs(tr - ref)) / top))
    return [
        _check("fdt_trace_theta_invariance", trace, trace_tol),
        _check("rotation_orthogonal_axis_fixed", rot, rot_tol, "1000 random axes and phases"),
    ]


def cold_vacuum_run(response, cfg, steps=10000, beta0=0.5, t_span=1.0):
    state = ParticleState(m=8.4e-18, beta=beta0, T1=0.0, Omega=COLD_OMEGA, theta=math.pi / 4, R=1e-6)
    solver = SolverConfig(max_step=t_span / steps)
    return evolve(state, Environment(0.0), response, None, t_span, solver, cfg)


def trajectory_identities(traj, c=CGS.c):
    """Per-step momentum and energy identity errors, and the global audit."""
    g = 1.0 / np.sqrt(1.0 - traj.beta**2)
    lhs = c * traj.beta * g * traj.dm + traj.m * c * g**3 * traj.dbeta
    scale_f = np.maximum(np.abs(traj.force), np.abs(c * traj.beta * g * traj.dm))
    mom = np.where(scale_f > 0, np.abs(lhs - traj.force) / np.where(scale_f > 0, scale_f, 1), 0.0)
    dE = traj.dm * g * c * c + traj.m * c * c * g**3 * traj.beta * traj.dbeta
    scale_e = np.abs(traj.intensity)
    en = np.where(scale_e > 0, np.abs(dE + traj.intensity) / np.where(scale_e > 0, scale_e, 1), 0.0)
    rad = traj.radiated_energy()[-1]
    dmc = traj.rest_energy_change(c)[-1]
    audit = abs(dmc + rad) / abs(rad) if rad != 0 else abs(dmc)
    return float(mom.max()), float(en.max()), float(audit)


def check_cold_dynamics(response, cfg, th):
    traj = cold_vacuum_run(response, cfg, th["dynamics_steps"])
    drift = float(np.max(np.abs(traj.beta - traj.beta0)))
    mom, en, audit = trajectory_identities(traj)
    ok = traj.status == "ok" and traj.steps >= th["dynamics_steps"]
    detail = f"{traj.steps} steps, status {traj.status}"
    return [
        _check("cold_vacuum_beta_constant", drift if ok else math.inf, th["drift_tol"], detail, traj.converged),
        _check("momentum_identity", mom, th["identity_tol"], "", traj.converged),
        _check("energy_identity", en, th["identity_tol"], "", traj.converged),
        _check("energy_audit", audit, th["audit_tol"], "", traj.converged),
    ]


def run_suite(response=None, cfg: QuadratureConfig = QuadratureConfig(), thresholds=None):
    """Run every check in a fixed order; returns a list of
    :class:`CheckResult`."""
    if response is None:
        response = ParticleResponse(Lorentz(1e-21, 2e13, 1e13))
    th = dict(DEFAULT_THRESHOLDS)
    th.update(thresholds or {})
    results = [check_passivity(response)]
    results.append(check_energy_balance(response, cfg, th["energy_balance_tol"]))
    results.append(check_universality(response, cfg, th["universality_tol"]))
    results.append(check_closed_form(cfg, th["closed_form_tol"]))
    results.append(check_shared_force(response, cfg, th["shared_force_tol"]))
    results.append(check_full_force(response, cfg, th["full_force_tol"]))
    results.append(check_theta_independence(response, cfg, th["theta_spread_tol"]))
    results.append(check_reduction(response, cfg, th["reduction_tol"]))
    results.append(check_oracle(response, cfg, th["oracle_tol"], th["oracle_grid"], th["oracle_scope"]))
    results += check_fdt(response, th["seed"], th["fdt_trace_tol"], th["rotation_tol"])
    results += check_cold_dynamics(response, cfg, th)
    return results


def format_report(results) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'status':6}  {'check':{width}}  {'measured':>12}  {'threshold':>9}  detail"]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{status:6}  {r.name:{width}}  {r.measured:12.4e}  {r.threshold:9.1e}  {r.detail}".rstrip())
    n_ok = sum(r.passed for r in results)
    lines.append(f"{n_ok}/{len(results)} checks passed")
    failed = [r.name for r in results if not r.passed]
    if failed:
        lines.append("failed: " + ", ".join(failed))
    return "\n".join(lines) + "\n"

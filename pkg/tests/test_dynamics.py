import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rotrad.dynamics import (ConstantHeatCapacity, PowerLawHeatCapacity, RadiationMemo, SolverConfig,
                             beta_derivative, evolve, mass_derivative, rates, temperature_derivative)
from rotrad.response import Lorentz, ParticleResponse
from rotrad.state import Environment, ParticleState
from rotrad.units import CGS
from rotrad.verify import trajectory_identities

C = CGS.c
RESP = ParticleResponse(Lorentz(1e-21, 2e13, 1e13))
M = 8.4e-18


def S(beta=0.0, T1=0.0, Omega=0.0, theta=math.pi / 4, m=M):
    return ParticleState(m, beta, T1, Omega, theta, 1e-6)


@pytest.mark.parametrize("beta, theta", [(0.3, 0.0), (0.5, 0.8), (0.9, math.pi / 2)])
def test_cold_vacuum_velocity_rate_vanishes(beta, theta):
    r = rates(S(beta, 0.0, 1e12, theta), Environment(0.0), RESP)
    F = r.integrals.force.value
    assert r.converged
    g = 1 / math.sqrt(1 - beta**2)
    assert abs(r.dbeta * g**3 * M * C) <= 1e-8 * abs(F)


def test_particle_at_rest_stays_at_rest():
    for env, st_ in ((Environment(300.0), S(0.0, 100.0, 1e12)), (Environment(0.0), S(0.0, 0.0, 1e12))):
        assert beta_derivative(st_, env, RESP).value == 0.0


def test_blackbody_friction_rate_negative():
    assert beta_derivative(S(0.1, 300.0), Environment(300.0), RESP).value < 0


def test_mass_rate_cold_vacuum_is_radiative_loss():
    s = S(0.5, 0.0, 1e12)
    r = rates(s, Environment(0.0), RESP)
    Q = r.integrals.heating.value
    assert Q < 0
    assert mass_derivative(s, Environment(0.0), RESP).value == s.gamma * Q / C**2
    # d(m g c^2)/dt = -I
    dE = r.dm * s.gamma * C**2 + M * C**2 * s.gamma**3 * s.beta * r.dbeta
    assert dE == pytest.approx(-r.integrals.intensity.value, rel=1e-8)


def test_mass_rate_equilibrium_is_zero():
    assert mass_derivative(S(0.0, 300.0), Environment(300.0), RESP).value == 0.0


@settings(max_examples=15)
@given(st.floats(0.0, 0.95), st.sampled_from([0.0, 100.0, 300.0]), st.sampled_from([0.0, 300.0, 600.0]),
       st.sampled_from([0.0, 1e10, 1e12]), st.floats(0.0, math.pi))
def test_momentum_identity_at_random_states(beta, T1, T2, Omega, theta):
    s = S(beta, T1, Omega, theta)
    r = rates(s, Environment(T2), RESP)
    g = s.gamma
    lhs = C * beta * g * r.dm + M * C * g**3 * r.dbeta
    F = r.integrals.force.value
    scale = max(abs(F), abs(C * beta * g * r.dm))
    assert abs(lhs - F) <= 1e-8 * scale + 1e-300


def test_temperature_rate_sign_and_floor():
    hc = ConstantHeatCapacity(1e-10)
    assert temperature_derivative(S(0.0, 100.0), Environment(300.0), RESP, hc).value > 0
    assert temperature_derivative(S(0.0, 300.0), Environment(300.0), RESP, hc).value == 0.0
    # cold spinning particle radiates (Qdot < 0) but cannot cool below zero
    assert temperature_derivative(S(0.5, 0.0, 1e12), Environment(0.0), RESP, hc).value == 0.0


def test_temperature_rate_heating_frames():
    hc = ConstantHeatCapacity(1e-10)
    s = S(0.6, 100.0, 0.0)
    lab = temperature_derivative(s, Environment(300.0), RESP, hc).value
    proper = temperature_derivative(s, Environment(300.0), RESP, hc, heating_frame="proper").value
    assert proper == pytest.approx(lab / s.gamma, rel=1e-15)
    with pytest.raises(ValueError):
        SolverConfig(heating_frame="rest")


def test_zero_heat_capacity_rejected():
    with pytest.raises(ValueError):
        temperature_derivative(S(0.0, 100.0), Environment(300.0), RESP, ConstantHeatCapacity(0.0))


def test_power_law_heat_capacity():
    hc = PowerLawHeatCapacity(2.0, 100.0, 3.0)
    assert hc(200.0) == 16.0
    assert hc(100.0) == 2.0


def test_memo_reuses_nearby_states():
    memo = RadiationMemo(RESP, Environment(300.0), rel=1e-6)
    a = memo.get(S(0.3, 100.0))
    b = memo.get(S(0.3 * (1 + 1e-8), 100.0))
    c = memo.get(S(0.31, 100.0))
    assert a is b and c is not a
    assert (memo.hits, memo.misses) == (1, 2)


def test_fixed_point_is_bit_stable():
    s = S(0.0, 300.0, 0.0)
    tr = evolve(s, Environment(300.0), RESP, ConstantHeatCapacity(1e-10), 10.0)
    assert tr.status == "ok" and tr.converged
    assert np.all(tr.beta == 0.0) and np.all(tr.m == M) and np.all(tr.T1 == 300.0)
    assert np.all(tr.dbeta == 0.0) and np.all(tr.dm == 0.0)


def test_zero_span_gives_single_sample():
    tr = evolve(S(0.5, 0.0, 1e12), Environment(0.0), RESP, None, 0.0)
    assert tr.steps == 0 and tr.t.tolist() == [0.0]
    with pytest.raises(ValueError):
        evolve(S(), Environment(0.0), RESP, None, -1.0)


def test_cold_vacuum_evolution():
    tr = evolve(S(0.5, 0.0, 1e12), Environment(0.0), RESP, None, 1.0, SolverConfig(max_step=1e-3))
    assert tr.status == "ok" and tr.steps >= 1000
    assert np.max(np.abs(tr.beta - 0.5)) < 1e-9
    assert np.all(np.diff(tr.delta_m) < 0)
    assert np.all(tr.intensity == tr.intensity[0])
    mom, en, audit = trajectory_identities(tr)
    assert mom < 1e-8 and en < 1e-8 and audit < 1e-4


def test_thermalization_is_monotone():
    tr = evolve(S(0.0, 100.0), Environment(300.0), RESP, ConstantHeatCapacity(1e-15), 5.0)
    assert tr.status == "ok"
    assert np.all(np.diff(tr.T1) > 0)
    assert 299.0 < tr.T1[-1] <= 300.0


def test_solver_order_fixed_steps():
    s, env, hc = S(0.0, 100.0), Environment(300.0), ConstantHeatCapacity(1e-15)
    ref = evolve(s, env, RESP, hc, 0.5, SolverConfig(rtol=1e-13, memo_rel=0.0)).T1[-1]
    errs = []
    for h in (0.05, 0.025, 0.0125):
        tr = evolve(s, env, RESP, hc, 0.5, SolverConfig(rtol=1e3, first_step=h, max_step=h, memo_rel=0.0))
        assert tr.steps == round(0.5 / h)
        errs.append(abs(tr.T1[-1] - ref))
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    assert all(r > 16 for r in ratios), ratios


def test_tighter_tolerance_reduces_error():
    s, env, hc = S(0.0, 100.0), Environment(300.0), ConstantHeatCapacity(1e-15)
    ref = evolve(s, env, RESP, hc, 0.5, SolverConfig(rtol=1e-13, memo_rel=0.0)).T1[-1]
    errs = [abs(evolve(s, env, RESP, hc, 0.5, SolverConfig(rtol=rt, memo_rel=0.0)).T1[-1] - ref)
            for rt in (1e-6, 1e-7, 1e-8)]
    assert errs[0] > errs[1] > errs[2]


def test_step_underflow_aborts_with_partial_trajectory():
    cfg = SolverConfig(rtol=1e-30, atol_beta=1e-300, atol_mass_rel=1e-300, atol_T=1e-300, min_step_rel=1e-3)
    tr = evolve(S(0.0, 100.0), Environment(300.0), RESP, ConstantHeatCapacity(1e-15), 1.0, cfg)
    assert tr.status == "step-underflow"
    assert tr.t[-1] < 1.0


def test_trajectory_invariants_hold():
    tr = evolve(S(0.3, 50.0, 1e12), Environment(300.0), RESP, ConstantHeatCapacity(1e-12), 2.0)
    assert np.all(np.diff(tr.t) > 0)
    assert np.all((tr.beta >= 0) & (tr.beta < 1)) and np.all(tr.m > 0) and np.all(tr.T1 >= 0)
    assert np.all(tr.residual < 1e-5)

"""Time evolution of speed, rest mass and temperature.

Speed follows ``g^3 m c dbeta/dt = F - g^2 beta Qdot / c``; the rest mass
absorbs the internal energy, ``dm/dt = g Qdot / c^2``, which together with
the speed equation reproduces both ``d(m g beta c)/dt = F`` and
``d(m g c^2)/dt = -I``.

The temperature law ``dT1/dt = Qdot / C(T1)`` is a closure chosen here, not
part of the radiation theory; swap it through the heat-capacity model. The
spin rate is held fixed because no torque enters the model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .kernels import KinematicParams
from .quadrature import QuadratureConfig, RadiationIntegrals, radiation_integrals
from .response import ParticleResponse
from .state import Environment, ParticleState
from .units import CGS

__all__ = [
    "ConstantHeatCapacity",
    "PowerLawHeatCapacity",
    "SolverConfig",
    "Rate",
    "Rates",
    "RadiationMemo",
    "Trajectory",
    "rates",
    "beta_derivative",
    "mass_derivative",
    "temperature_derivative",
    "evolve",
]


@dataclass(frozen=True)
class ConstantHeatCapacity:
    C: float  # erg/K

    def __call__(self, T):
        return self.C


@dataclass(frozen=True)
class PowerLawHeatCapacity:
    """``C(T) = C0 (T / T_ref) ** exponent``."""

    C0: float
    T_ref: float
    exponent: float

    def __call__(self, T):
        return self.C0 * (T / self.T_ref) ** self.exponent


HeatCapacityModel = Union[ConstantHeatCapacity, PowerLawHeatCapacity]


@dataclass(frozen=True)
class SolverConfig:
    """Controls of the embedded Runge-Kutta integrator.

    ``heating_frame`` selects whether ``Qdot`` drives the temperature per
    unit background time (``"lab"``) or per unit proper time (``"proper"``,
    an extra ``1/gamma``).
    """

    rtol: float = 1e-8
    atol_beta: float = 1e-14
    atol_mass_rel: float = 1e-14
    atol_T: float = 1e-9
    first_step: float | None = None
    max_step: float = math.inf
    max_steps: int = 1_000_000
    min_step_rel: float = 1e-13
    memo_rel: float = 1e-6
    heating_frame: str = "lab"

    def __post_init__(self):
        if self.heating_frame not in ("lab", "proper"):
            raise ValueError(f"heating_frame must be 'lab' or 'proper', got {self.heating_frame!r}")
        if self.rtol <= 0 or self.max_step <= 0:
            raise ValueError("rtol and max_step must be positive")


@dataclass(frozen=True)
class Rate:
    """A derivative together with the convergence of the integrals behind it."""

    value: float
    converged: bool

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class Rates:
    dbeta: float
    dm: float
    dT1: float
    integrals: RadiationIntegrals
    converged: bool


class RadiationMemo:
    """Reuse radiation integrals for states whose ``beta`` and ``T1`` differ
    by less than ``rel`` (relative) from a stored state.

    The ``T1`` window is relative to ``min(T1, |T1 - T2|)``. Zero scales
    only match exactly.
    """

    def __init__(self, response: ParticleResponse, env: Environment,
                 quad_cfg: QuadratureConfig = QuadratureConfig(), rel: float = 1e-6, size: int = 16):
        self.response = response
        self.env = env
        self.quad_cfg = quad_cfg
        self.rel = rel
        self.size = size
        self._entries: list[tuple[float, float, float, float, RadiationIntegrals]] = []
        self.hits = 0
        self.misses = 0

    def _close(self, a, b, scale):
        return abs(a - b) <= self.rel * scale

    def get(self, state: ParticleState) -> RadiationIntegrals:
        # T1 is compared on the smaller of its own size and its distance to
        # T2, so that reuse never carries a heating rate across equilibrium.
        T2 = self.env.T2
        for beta, T1, Om, th, res in reversed(self._entries):
            if (Om == state.Omega and th == state.theta and self._close(state.beta, beta, abs(beta))
                    and self._close(state.T1, T1, min(abs(T1), abs(T1 - T2)))):
                self.hits += 1
                return res
        self.misses += 1
        res = radiation_integrals(_params(state, self.env, self.response), self.quad_cfg)
        self._entries.append((state.beta, state.T1, state.Omega, state.theta, res))
        if len(self._entries) > self.size:
            self._entries.pop(0)
        return res


def _params(state: ParticleState, env: Environment, response: ParticleResponse) -> KinematicParams:
    return KinematicParams(state.beta, state.theta, state.Omega, state.T1, env.T2, response)


def _heat_rate(Q, state, heat_model, frame):
    if state.T1 <= 0 and Q <= 0:
        return 0.0
    C = heat_model(state.T1)
    if not C > 0:
        raise ValueError(f"heat capacity must be positive, got C({state.T1}) = {C}")
    rate = Q / C
    if frame == "proper":
        rate /= state.gamma
    return rate


def rates(state: ParticleState, env: Environment, response: ParticleResponse,
          heat_model: HeatCapacityModel | None = None, quad_cfg: QuadratureConfig = QuadratureConfig(),
          heating_frame: str = "lab", memo: RadiationMemo | None = None) -> Rates:
    """All three derivatives from one evaluation of the radiation integrals."""
    res = memo.get(state) if memo is not None else radiation_integrals(_params(state, env, response), quad_cfg)
    c = CGS.c
    F = res.force.value
    Q = res.heating.value
    g = state.gamma
    b = state.beta
    dbeta = (F - g * g * b * Q / c) / (g**3 * state.m * c)
    dm = g * Q / (c * c)
    dT = _heat_rate(Q, state, heat_model, heating_frame) if heat_model is not None else 0.0
    return Rates(dbeta, dm, dT, res, res.converged)


def beta_derivative(state, env, response, quad_cfg: QuadratureConfig = QuadratureConfig()) -> Rate:
    """``dbeta/dt`` (1/s)."""
    r = rates(state, env, response, quad_cfg=quad_cfg)
    return Rate(r.dbeta, r.converged)


def mass_derivative(state, env, response, quad_cfg: QuadratureConfig = QuadratureConfig()) -> Rate:
    """``dm/dt = gamma Qdot / c^2`` (g/s)."""
    r = rates(state, env, response, quad_cfg=quad_cfg)
    return Rate(r.dm, r.converged)


def temperature_derivative(state, env, response, heat_model: HeatCapacityModel,
                           quad_cfg: QuadratureConfig = QuadratureConfig(),
                           heating_frame: str = "lab") -> Rate:
    """``dT1/dt = Qdot / C(T1)`` (K/s), floored at zero for a particle at
    ``T1 = 0`` that is losing energy."""
    r = rates(state, env, response, heat_model, quad_cfg, heating_frame)
    return Rate(r.dT1, r.converged)


# Dormand-Prince 5(4)
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass
class Trajectory:
    """Accepted samples of an evolution.

    ``status`` is ``"ok"``, ``"step-underflow"`` or ``"max-steps"``;
    ``converged`` is False if any radiation integral along the way missed
    its tolerance.
    """

    t: np.ndarray
    beta: np.ndarray
    m: np.ndarray
    T1: np.ndarray
    force: np.ndarray
    heating: np.ndarray
    intensity: np.ndarray
    residual: np.ndarray
    dbeta: np.ndarray
    dm: np.ndarray
    beta0: float
    m0: float
    delta_beta: np.ndarray = field(repr=False)
    delta_m: np.ndarray = field(repr=False)
    status: str = "ok"
    converged: bool = True
    rejected_steps: int = 0

    @property
    def steps(self) -> int:
        return len(self.t) - 1

    def rest_energy_change(self, c: float) -> np.ndarray:
        """``m g c^2 - m0 g0 c^2`` along the trajectory, free of cancellation."""
        r0 = math.sqrt(1.0 - self.beta0**2)
        r = np.sqrt(1.0 - self.beta**2)
        db = self.delta_beta
        # g - g0 = (b^2 - b0^2) / (r r0 (r + r0)) with r = 1/g
        dg = db * (2 * self.beta0 + db) / (r * r0 * (r + r0))
        return c * c * (self.delta_m / r + self.m0 * dg)

    def radiated_energy(self) -> np.ndarray:
        """Cumulative trapezoid of the recorded power."""
        out = np.zeros_like(self.t)
        if len(self.t) > 1:
            out[1:] = np.cumsum(0.5 * np.diff(self.t) * (self.intensity[1:] + self.intensity[:-1]))
        return out


def evolve(state0: ParticleState, env: Environment, response: ParticleResponse,
           heat_model: HeatCapacityModel | None, t_span: float,
           solver_cfg: SolverConfig = SolverConfig(),
           quad_cfg: QuadratureConfig = QuadratureConfig()) -> Trajectory:
    """Integrate ``(beta, m, T1)`` over ``[0, t_span]``.

    The unknowns are stored as offsets ``beta - beta0`` and ``m - m0`` so that
    tiny radiative changes stay resolved against the rest mass. Steps whose
    proposal leaves ``0 <= beta < 1``, ``m > 0``, ``T1 >= 0`` are rejected and
    retried with half the size.
    """
    if not (math.isfinite(t_span) and t_span >= 0):
        raise ValueError(f"t_span must be finite and >= 0, got {t_span}")
    cfg = solver_cfg
    memo = RadiationMemo(response, env, quad_cfg, cfg.memo_rel)
    b0, m0 = state0.beta, state0.m

    def state_of(y):
        return ParticleState(m0 + y[1], b0 + y[0], max(y[2], 0.0), state0.Omega, state0.theta, state0.R)

    def deriv(y):
        r = rates(state_of(y), env, response, heat_model, quad_cfg, cfg.heating_frame, memo)
        return np.array([r.dbeta, r.dm, r.dT1]), r

    def valid(y):
        return 0 <= b0 + y[0] < 1 and m0 + y[1] > 0 and y[2] >= 0

    y = np.array([0.0, 0.0, state0.T1])
    k1, r = deriv(y)
    t = 0.0
    rows = [(t, y.copy(), r)]
    converged = r.converged
    status = "ok"
    rejected = 0
    atol = np.array([cfg.atol_beta, cfg.atol_mass_rel * m0, cfg.atol_T])
    h = cfg.first_step or min(cfg.max_step, 1e-2 * t_span)
    steps = 0
    while t < t_span:
        if steps >= cfg.max_steps:
            status = "max-steps"
            break
        h = min(h, cfg.max_step, t_span - t)
        if h <= cfg.min_step_rel * max(t_span, abs(t)):
            status = "step-underflow"
            break
        ks = [k1]
        ok = True
        for i in range(1, 7):
            yi = y + h * sum(a * k for a, k in zip(_A[i], ks))
            if not valid(yi):
                ok = False
                break
            ki, ri = deriv(yi)
            ks.append(ki)
        if not ok:
            rejected += 1
            h *= 0.5
            continue
        y_new = y + h * sum(b * k for b, k in zip(_B5, ks[:6]))
        err_vec = h * sum(e * k for e, k in zip(_E, ks))
        sc = atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = math.sqrt(float(np.mean((err_vec / sc) ** 2)))
        if err <= 1.0 and valid(y_new):
            t = t_span if t_span - (t + h) <= 1e-12 * t_span else t + h
            y = y_new
            k1 = ks[6]
            converged &= ri.converged
            rows.append((t, y.copy(), ri))
            steps += 1
            fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h *= fac
        else:
            rejected += 1
            h *= max(0.2, 0.9 * err ** -0.25) if math.isfinite(err) and err > 0 else 0.5

    ts = np.array([row[0] for row in rows])
    ys = np.array([row[1] for row in rows])
    res = [row[2] for row in rows]
    return Trajectory(
        t=ts,
        beta=b0 + ys[:, 0],
        m=m0 + ys[:, 1],
        T1=ys[:, 2],
        force=np.array([r.integrals.force.value for r in res]),
        heating=np.array([r.integrals.heating.value for r in res]),
        intensity=np.array([r.integrals.intensity.value for r in res]),
        residual=np.array([r.integrals.energy_balance_residual for r in res]),
        dbeta=np.array([r.dbeta for r in res]),
        dm=np.array([r.dm for r in res]),
        beta0=b0,
        m0=m0,
        delta_beta=ys[:, 0],
        delta_m=ys[:, 1],
        status=status,
        converged=bool(converged),
        rejected_steps=rejected,
    )

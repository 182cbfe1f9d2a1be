"""Integrands for the tangential force, heating rate and net radiated power.

All three share one brace::

    B_u(x) a''(g w (1+b x))        [coth_2(w) - coth_1(g w (1+b x))]
  + B_s(x) a''(g w (1+b x) + Om)   [coth_2(w) - coth_1(g w (1+b x) + Om)]

where ``coth_j(w) = coth(hbar w / 2 k_B T_j)`` and ``x`` is the cosine of the
emission angle in the background frame. They differ only in prefactor, in the
measure factor (``x``, ``1 + b x`` or ``1``) and, for the power, in the order
of the coth difference.

The background pole at ``w = 0`` is removed by the ``w**4`` weight and the
particle-frame pole at ``g w (1+b x) + Om = 0`` by the zero of ``a''``; both
are resolved explicitly from the pole masks, never through inf/NaN
arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .response import ParticleResponse
from .thermal import coth_diff_ratio
from .units import CGS, PhysicalConstants

__all__ = [
    "KinematicParams",
    "bracket_unshifted",
    "bracket_shifted",
    "angular_weight",
    "force_integrand",
    "heat_integrand",
    "intensity_integrand",
]

FOUR_PI = 4.0 * math.pi
_POLE_REL = 1e-250


@dataclass(frozen=True)
class KinematicParams:
    """Motion, temperatures and response entering the integrals (CGS).

    ``beta = V/c``; ``theta`` is the angle between spin axis and velocity.
    """

    beta: float
    theta: float
    Omega: float
    T1: float
    T2: float
    response: ParticleResponse
    constants: PhysicalConstants = field(default=CGS, repr=False)

    def __post_init__(self):
        vals = (self.beta, self.theta, self.Omega, self.T1, self.T2)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("kinematic parameters must be finite")
        if not 0 <= self.beta < 1:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")
        if self.Omega < 0 or self.T1 < 0 or self.T2 < 0:
            raise ValueError("Omega, T1 and T2 must be non-negative")

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt(1.0 - self.beta * self.beta)

    @property
    def w1(self) -> float:
        """Thermal frequency of the particle, ``k_B T1 / hbar``."""
        return self.constants.k_B * self.T1 / self.constants.hbar

    @property
    def w2(self) -> float:
        return self.constants.k_B * self.T2 / self.constants.hbar

    @property
    def is_cold(self) -> bool:
        return self.T1 == 0 and self.T2 == 0

    @property
    def is_equilibrium(self) -> bool:
        return self.beta == 0 and self.Omega == 0 and self.T1 == self.T2

    def replace(self, **changes) -> "KinematicParams":
        from dataclasses import replace

        return replace(self, **changes)


def bracket_unshifted(beta, x, theta):
    """Angular coefficient of the un-shifted term:
    ``(1-b^2)(1-x^2) cos^2 + ((1+b^2)(1+x^2) + 4 b x) sin^2 / 2``."""
    c2 = math.cos(theta) ** 2
    s2 = math.sin(theta) ** 2
    return _bracket(beta, x, c2, s2 / 2.0)


def bracket_shifted(beta, x, theta):
    """Angular coefficient of the spin-shifted term, identical to the
    emission-angle weight ``f(x, theta)`` of the cold-vacuum spectrum."""
    c2 = math.cos(theta) ** 2
    s2 = math.sin(theta) ** 2
    return _bracket(beta, x, s2, (1.0 + c2) / 2.0)


angular_weight = bracket_shifted


def _bracket(beta, x, transverse, longitudinal):
    x = np.asarray(x, dtype=float)
    b2 = beta * beta
    return (1.0 - b2) * (1.0 - x * x) * transverse + ((1.0 + b2) * (1.0 + x * x) + 4.0 * beta * x) * longitudinal


@dataclass(frozen=True)
class _Kernel:
    """Unit-agnostic kernel data: frequencies in units of ``omega_ref``,
    polarizability in units of ``alpha_ref``."""

    beta: float
    gamma: float
    theta: float
    Omega: float
    w1: float
    w2: float
    response: ParticleResponse
    omega_ref: float = 1.0
    alpha_ref: float = 1.0

    @classmethod
    def from_params(cls, p: KinematicParams, omega_ref: float = 1.0, alpha_ref: float = 1.0):
        return cls(p.beta, p.gamma, p.theta, p.Omega / omega_ref, p.w1 / omega_ref,
                   p.w2 / omega_ref, p.response, omega_ref, alpha_ref)

    def alpha(self, nu):
        return np.asarray(self.response.alpha_im(nu * self.omega_ref)) / self.alpha_ref

    @property
    def slope0(self) -> float:
        return self.response.slope_at_zero() * self.omega_ref / self.alpha_ref

    def _term(self, omega, nu, reverse):
        # alpha''(nu) * (coth_2(omega) - coth_1(nu)), sign flipped if reverse
        if reverse:
            diff, _ = coth_diff_ratio(nu, self.w1, omega, self.w2)
            sign = 1.0
        else:
            diff, _ = coth_diff_ratio(omega, self.w2, nu, self.w1)
            sign = -1.0
        # Arguments within 1e-250 of a pole are replaced by the limit; the
        # occupation numbers there would overflow.
        bg_pole = np.abs(omega) <= _POLE_REL * self.w2
        p_pole = (np.abs(nu) <= _POLE_REL * self.w1) & ~bg_pole
        val = self.alpha(nu) * np.where(bg_pole | p_pole, 0.0, diff)
        # alpha''(nu) coth_1(nu) -> 2 w1 alpha''_slope(0) at nu = 0
        return np.where(p_pole, sign * 2.0 * self.w1 * self.slope0, val)

    def weighted_brace(self, omega, x, reverse=False):
        """``omega**4`` times the brace; exact zero at ``omega = 0``."""
        omega, x = np.broadcast_arrays(np.asarray(omega, dtype=float), np.asarray(x, dtype=float))
        c2 = math.cos(self.theta) ** 2
        s2 = math.sin(self.theta) ** 2
        nu = self.gamma * (1.0 + self.beta * x) * omega
        brace = _bracket(self.beta, x, c2, s2 / 2.0) * self._term(omega, nu, reverse)
        brace = brace + _bracket(self.beta, x, s2, (1.0 + c2) / 2.0) * self._term(omega, nu + self.Omega, reverse)
        w2 = omega * omega
        return w2 * w2 * brace

    def components(self, omega, x):
        """Force, heating and power integrands in reference units, stacked on
        the last axis. Force is in ``force_ref``; the other two in
        ``intensity_ref``."""
        omega = np.asarray(omega, dtype=float)
        x = np.asarray(x, dtype=float)
        pre = self.gamma / FOUR_PI
        wb = self.weighted_brace(omega, x)
        force = -pre * x * wb
        heat = pre * (1.0 + self.beta * x) * wb
        power = pre * self.weighted_brace(omega, x, reverse=True)
        return np.stack(np.broadcast_arrays(force, heat, power), axis=-1)


def _physical(p: KinematicParams):
    k = p.constants
    return _Kernel.from_params(p), k.hbar / k.c**3


def force_integrand(omega, x, p: KinematicParams):
    """Force spectral density (dyn per rad/s per unit x)."""
    ker, unit = _physical(p)
    return -(ker.gamma / FOUR_PI) * unit / p.constants.c * np.asarray(x) * ker.weighted_brace(omega, x)


def heat_integrand(omega, x, p: KinematicParams):
    """Heating-rate spectral density (erg/s per rad/s per unit x)."""
    ker, unit = _physical(p)
    return (ker.gamma / FOUR_PI) * unit * (1.0 + p.beta * np.asarray(x)) * ker.weighted_brace(omega, x)


def intensity_integrand(omega, x, p: KinematicParams):
    """Net radiated power density, emission minus absorption (erg/s per
    rad/s per unit x)."""
    ker, unit = _physical(p)
    return (ker.gamma / FOUR_PI) * unit * ker.weighted_brace(omega, x, reverse=True)

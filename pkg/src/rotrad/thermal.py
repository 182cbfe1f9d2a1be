"""Thermal factors ``coth(hbar w / 2 k_B T)``.

The coth is split as ``sign(w) * (1 + 2 n)`` with the Bose occupation
``n = 1 / expm1(|w| / w_T)`` and ``w_T = k_B T / hbar``. Differences of two
coth factors with the same sign reduce to ``2 sign (n_a - n_b)``, which keeps
the exponentially small tails that naive subtraction rounds to zero.

``T = 0`` is exact: the coth is ``sign(w)``. The point ``w = 0`` at ``T > 0``
is a pole; the array helpers report it through a boolean mask and the scalar
API raises :class:`PoleError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .units import CGS, PhysicalConstants

__all__ = [
    "ThermalArg",
    "PoleError",
    "coth_planck",
    "coth_excess",
    "coth_diff",
    "occupation",
    "coth_ratio",
    "coth_diff_ratio",
]


class PoleError(ArithmeticError):
    """coth evaluated at zero frequency and finite temperature."""


@dataclass(frozen=True)
class ThermalArg:
    """Frequency (rad/s, any sign) and temperature (K)."""

    omega: float
    temperature: float

    def __post_init__(self):
        if math.isnan(self.omega) or math.isnan(self.temperature):
            raise ValueError("thermal argument is NaN")
        if not math.isfinite(self.omega):
            raise ValueError(f"omega must be finite, got {self.omega}")
        if not (self.temperature >= 0 and math.isfinite(self.temperature)):
            raise ValueError(f"temperature must be finite and >= 0, got {self.temperature}")

    @classmethod
    def from_half_quantum(cls, x: float, temperature: float, constants: PhysicalConstants = CGS):
        """Argument whose ``hbar w / 2 k_B T`` equals ``x``."""
        return cls(2.0 * x * constants.k_B * temperature / constants.hbar, temperature)

    def thermal_frequency(self, constants: PhysicalConstants = CGS) -> float:
        return constants.k_B * self.temperature / constants.hbar


def occupation(omega, w):
    """Bose occupation ``1/expm1(|omega|/w)``; zero where ``w == 0``.

    ``omega`` and ``w`` share units. At ``omega == 0`` with ``w > 0`` the
    result is ``inf``.
    """
    omega = np.asarray(omega, dtype=float)
    w = np.asarray(w, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        n = 1.0 / np.expm1(np.abs(omega) / w)
    return np.where(w > 0, n, 0.0)


def coth_ratio(omega, w):
    """Vectorised ``coth(omega / 2w)``.

    Returns
    -------
    value : ndarray
        The coth, ``sign(omega)`` where ``w == 0``; NaN at poles.
    pole : ndarray of bool
        True where ``omega == 0`` and ``w > 0``.
    """
    omega = np.asarray(omega, dtype=float)
    w = np.asarray(w, dtype=float)
    pole = (omega == 0) & (w > 0)
    s = np.sign(omega)
    with np.errstate(invalid="ignore"):
        val = s * (1.0 + 2.0 * occupation(omega, w))
    return np.where(pole, np.nan, val), pole


def coth_diff_ratio(omega_a, w_a, omega_b, w_b):
    """Vectorised ``coth(omega_a/2w_a) - coth(omega_b/2w_b)`` without
    cancellation between same-sign arguments.

    Returns ``(diff, pole)``; ``diff`` is NaN wherever either side is a pole.
    """
    omega_a = np.asarray(omega_a, dtype=float)
    omega_b = np.asarray(omega_b, dtype=float)
    w_a = np.asarray(w_a, dtype=float)
    w_b = np.asarray(w_b, dtype=float)
    sa = np.sign(omega_a)
    sb = np.sign(omega_b)
    na = occupation(omega_a, w_a)
    nb = occupation(omega_b, w_b)
    pole = ((omega_a == 0) & (w_a > 0)) | ((omega_b == 0) & (w_b > 0))
    with np.errstate(invalid="ignore"):
        same = 2.0 * sa * (na - nb)
        mixed = sa * (1.0 + 2.0 * na) - sb * (1.0 + 2.0 * nb)
    diff = np.where(sa == sb, same, mixed)
    return np.where(pole, np.nan, diff), pole


def _scalar(arg: ThermalArg, constants):
    return arg.omega, arg.thermal_frequency(constants)


def coth_planck(arg: ThermalArg, constants: PhysicalConstants = CGS) -> float:
    """``coth(hbar w / 2 k_B T)``; ``sign(w)`` at ``T = 0``.

    Raises
    ------
    PoleError
        At ``w = 0`` with ``T > 0``.
    """
    val, pole = coth_ratio(*_scalar(arg, constants))
    if pole:
        raise PoleError(f"coth pole at omega=0, T={arg.temperature} K")
    return float(val)


def coth_excess(arg: ThermalArg, constants: PhysicalConstants = CGS) -> float:
    """``coth - sign(w) = 2 sign(w) n``, accurate far into the tail."""
    w, wt = _scalar(arg, constants)
    if w == 0 and wt > 0:
        raise PoleError(f"coth pole at omega=0, T={arg.temperature} K")
    return float(2.0 * np.sign(w) * occupation(w, wt))


def coth_diff(a: ThermalArg, b: ThermalArg, constants: PhysicalConstants = CGS) -> float:
    """``coth_planck(a) - coth_planck(b)``, exact zero for identical arguments."""
    diff, pole = coth_diff_ratio(*_scalar(a, constants), *_scalar(b, constants))
    if pole:
        raise PoleError("coth difference touches a pole")
    return float(diff)

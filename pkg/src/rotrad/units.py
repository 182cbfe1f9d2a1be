"""Physical constants (CGS-Gaussian) and the dimensionless scaling used by
every integral in the package.

Frequencies are measured in units of ``omega_ref`` and polarizabilities in
units of ``alpha_ref``. With those two choices the natural power unit is
``hbar * omega_ref**5 * alpha_ref / c**3``; forces carry one more ``1/c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import scipy.constants as _sc

__all__ = [
    "PhysicalConstants",
    "CGS",
    "UnitScale",
    "make_scale",
    "validate_regime",
    "thermal_frequency",
]


@dataclass(frozen=True)
class PhysicalConstants:
    """Reduced Planck constant (erg s), Boltzmann constant (erg/K) and the
    speed of light (cm/s)."""

    hbar: float
    k_B: float
    c: float

    def __post_init__(self):
        for name in ("hbar", "k_B", "c"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")


# CODATA 2018 exact/recommended values converted from SI.
CGS = PhysicalConstants(hbar=_sc.hbar * 1e7, k_B=_sc.k * 1e7, c=_sc.c * 1e2)


def thermal_frequency(T, constants: PhysicalConstants = CGS) -> float:
    """Return ``k_B T / hbar`` in rad/s (zero at ``T = 0``)."""
    return constants.k_B * T / constants.hbar


_KINDS = ("frequency", "volume", "power", "force", "time", "temperature")


@dataclass(frozen=True)
class UnitScale:
    """Reference scales for the dimensionless kernels.

    Parameters
    ----------
    omega_ref : float
        Reference angular frequency (rad/s).
    alpha_ref : float
        Reference polarizability (cm^3).
    constants : PhysicalConstants
        Constants used to build the derived references.
    """

    omega_ref: float
    alpha_ref: float
    constants: PhysicalConstants = CGS

    def __post_init__(self):
        for name in ("omega_ref", "alpha_ref"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")

    @property
    def intensity_ref(self) -> float:
        k = self.constants
        return k.hbar * self.omega_ref**5 * self.alpha_ref / k.c**3

    @property
    def force_ref(self) -> float:
        return self.intensity_ref / self.constants.c

    @property
    def time_ref(self) -> float:
        return 1.0 / self.omega_ref

    @property
    def temperature_ref(self) -> float:
        # temperature whose thermal frequency equals omega_ref
        return self.constants.hbar * self.omega_ref / self.constants.k_B

    def reference(self, kind: str) -> float:
        if kind == "frequency":
            return self.omega_ref
        if kind == "volume":
            return self.alpha_ref
        if kind == "power":
            return self.intensity_ref
        if kind == "force":
            return self.force_ref
        if kind == "time":
            return self.time_ref
        if kind == "temperature":
            return self.temperature_ref
        raise ValueError(f"unknown quantity kind {kind!r}; expected one of {_KINDS}")

    def to_dimensionless(self, value, kind: str):
        return value / self.reference(kind)

    def to_physical(self, value, kind: str):
        return value * self.reference(kind)


def make_scale(omega_ref, alpha_ref, constants: PhysicalConstants = CGS) -> UnitScale:
    """Build a :class:`UnitScale`; raises ``ValueError`` on non-positive or
    non-finite input."""
    return UnitScale(float(omega_ref), float(alpha_ref), constants)


def validate_regime(state, env, threshold: float = 0.1,
                    constants: PhysicalConstants = CGS) -> list[str]:
    """Check the point-dipole conditions for a particle.

    Two ratios must stay below ``threshold``: the rim speed ``Omega R / c``
    and the size relative to the shortest thermal wavelength,
    ``R / min(2 pi hbar c / k_B T1, 2 pi hbar c / k_B T2)``.

    Returns
    -------
    list of str
        One message per violated condition, empty when both hold.
    """
    R = state.R
    if not (math.isfinite(R) and R > 0):
        raise ValueError(f"radius must be positive and finite, got {R!r}")
    warnings = []
    rim = state.Omega * R / constants.c
    if rim >= threshold:
        warnings.append(
            f"rotation too fast for a point dipole: Omega*R/c = {rim:.3e} >= {threshold:g}"
        )
    T_max = max(state.T1, env.T2)
    if T_max > 0:
        wavelength = 2 * math.pi * constants.hbar * constants.c / (constants.k_B * T_max)
        size = R / wavelength
        if size >= threshold:
            warnings.append(
                "particle not small against the thermal wavelength: "
                f"R/lambda_T = {size:.3e} >= {threshold:g}"
            )
    return warnings

"""Rotation of the body frame and the fluctuation-dissipation weights of the
spontaneous dipole moment seen from the comoving (non-rotating) frame.

Rotation mixes the body-frame spectrum into side bands at ``w +/- Omega``.
The weights returned here are the bracketed factors multiplying
``hbar * pi * delta(w + w')`` in the diagonal correlators; the magnetic
moment uses the same functions with the magnetic polarizability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .thermal import coth_ratio
from .units import CGS, PhysicalConstants

__all__ = [
    "RotationSpec",
    "FdtContext",
    "rotation_matrix",
    "alpha_coth",
    "dipole_spectral_weight",
    "spectral_weight_trace",
]

_LEVI_CIVITA = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _LEVI_CIVITA[_i, _j, _k] = 1.0
    _LEVI_CIVITA[_i, _k, _j] = -1.0


@dataclass(frozen=True)
class RotationSpec:
    """Unit rotation axis and accumulated phase ``Omega * tau`` (rad)."""

    axis: tuple[float, float, float]
    phase: float

    def __post_init__(self):
        n = np.asarray(self.axis, dtype=float)
        if n.shape != (3,):
            raise ValueError("rotation axis must be a 3-vector")
        if abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise ValueError(f"rotation axis must be a unit vector, |n| = {np.linalg.norm(n)!r}")


def rotation_matrix(spec: RotationSpec) -> np.ndarray:
    """``A_ik = n_i n_k + (delta_ik - n_i n_k) cos(phi) - e_ikl n_l sin(phi)``."""
    n = np.asarray(spec.axis, dtype=float)
    nn = np.outer(n, n)
    cross = np.einsum("ikl,l->ik", _LEVI_CIVITA, n)
    return nn + (np.eye(3) - nn) * math.cos(spec.phase) - cross * math.sin(spec.phase)


@dataclass(frozen=True)
class FdtContext:
    """Spin-velocity angle ``theta``, spin rate ``Omega`` (rad/s), body
    temperature ``T1`` (K) and one polarizability channel."""

    theta: float
    Omega: float
    T1: float
    model: object

    def __post_init__(self):
        if self.Omega < 0 or self.T1 < 0:
            raise ValueError("Omega and T1 must be non-negative")
        if not 0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")


def alpha_coth(model, omega, w_T):
    """``alpha''(w) coth(w / 2 w_T)`` with the removable pole at ``w = 0``
    replaced by its limit ``2 w_T alpha''_slope(0)``."""
    omega = np.asarray(omega, dtype=float)
    c, pole = coth_ratio(omega, w_T)
    val = np.asarray(model.alpha_im(omega)) * np.where(pole, 0.0, c)
    return np.where(pole, 2.0 * w_T * model.slope_at_zero(), val)


def dipole_spectral_weight(component: str, omega, ctx: FdtContext,
                           constants: PhysicalConstants = CGS):
    """Diagonal weight for ``component`` in ``{"xx", "yy", "zz"}``.

    ``xx`` carries ``2 cos^2(theta)`` on the unshifted term and
    ``sin^2(theta)`` on the side bands; ``yy`` swaps the two; ``zz`` holds
    the side bands only.
    """
    w_T = constants.k_B * ctx.T1 / constants.hbar
    omega = np.asarray(omega, dtype=float)
    centre = alpha_coth(ctx.model, omega, w_T)
    bands = alpha_coth(ctx.model, omega + ctx.Omega, w_T) + alpha_coth(ctx.model, omega - ctx.Omega, w_T)
    c2 = math.cos(ctx.theta) ** 2
    s2 = math.sin(ctx.theta) ** 2
    if component == "xx":
        out = 2.0 * c2 * centre + s2 * bands
    elif component == "yy":
        out = 2.0 * s2 * centre + c2 * bands
    elif component == "zz":
        out = bands
    else:
        raise ValueError(f"unknown component {component!r}")
    return out if out.ndim else float(out)


def spectral_weight_trace(omega, ctx: FdtContext, constants: PhysicalConstants = CGS):
    """Sum of the three diagonal weights; independent of ``theta``."""
    return sum(dipole_spectral_weight(c, omega, ctx, constants) for c in ("xx", "yy", "zz"))

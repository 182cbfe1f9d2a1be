"""Value types describing the particle and its surroundings."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Environment:
    """Equilibrium photon gas at temperature ``T2`` (K)."""

    T2: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.T2) and self.T2 >= 0):
            raise ValueError(f"background temperature must be >= 0, got {self.T2!r}")


@dataclass(frozen=True)
class ParticleState:
    """Instantaneous particle state.

    Attributes
    ----------
    m : float
        Rest mass (g).
    beta : float
        Speed relative to the background in units of ``c``.
    T1 : float
        Particle temperature in its rest frame (K).
    Omega : float
        Spin rate (rad/s).
    theta : float
        Angle between the spin axis and the velocity (rad).
    R : float
        Radius (cm).
    """

    m: float
    beta: float
    T1: float
    Omega: float
    theta: float
    R: float

    def __post_init__(self):
        vals = (self.m, self.beta, self.T1, self.Omega, self.theta, self.R)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite particle state: {self!r}")
        if self.m <= 0:
            raise ValueError(f"mass must be positive, got {self.m}")
        if not 0 <= self.beta < 1:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")
        if self.T1 < 0:
            raise ValueError(f"T1 must be >= 0, got {self.T1}")
        if self.Omega < 0:
            raise ValueError(f"Omega must be >= 0, got {self.Omega}")
        if self.R <= 0:
            raise ValueError(f"R must be positive, got {self.R}")

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt(1.0 - self.beta**2)

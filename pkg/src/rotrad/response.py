"""Dissipative (imaginary) part of the particle polarizability.

Every model is evaluated through its odd extension, ``a(-w) = -a(w)``, so the
integrals over negative frequencies see a causal response. Only ``alpha''``
is modelled; the reactive part never enters the radiation integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

__all__ = [
    "Lorentz",
    "PowerLaw",
    "Tabulated",
    "Zero",
    "ParticleResponse",
    "ValidationReport",
    "alpha_im",
    "combined_alpha_im",
    "validate_model",
    "load_tabulated",
    "model_to_dict",
    "model_from_dict",
    "response_to_dict",
]


def _check_omega(omega):
    w = np.asarray(omega, dtype=float)
    if np.isnan(w).any():
        raise ValueError("frequency is NaN")
    return w


def _odd(positive_branch, omega):
    w = _check_omega(omega)
    out = np.sign(w) * positive_branch(np.abs(w))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class Lorentz:
    """Damped oscillator,
    ``a''(w) = alpha0 w0^2 g w / ((w0^2 - w^2)^2 + g^2 w^2)``."""

    alpha0: float
    omega0: float
    gamma_d: float

    def _branch(self, w):
        w0sq = self.omega0**2
        return self.alpha0 * w0sq * self.gamma_d * w / ((w0sq - w * w) ** 2 + (self.gamma_d * w) ** 2)

    def alpha_im(self, omega):
        return _odd(self._branch, omega)

    def slope_at_zero(self) -> float:
        return self.alpha0 * self.gamma_d / self.omega0**2

    def features(self) -> tuple[float, ...]:
        return (self.omega0,)

    def magnitude(self) -> float:
        return abs(self.alpha0)


@dataclass(frozen=True)
class PowerLaw:
    """``a''(w) = kappa * w * |w|**(n - 1)``; ``n = 1`` is the Ohmic case."""

    kappa: float
    exponent: int = 1

    def __post_init__(self):
        if int(self.exponent) != self.exponent or self.exponent < 1:
            raise ValueError(f"exponent must be a positive integer, got {self.exponent!r}")

    def _branch(self, w):
        return self.kappa * w ** self.exponent

    def alpha_im(self, omega):
        return _odd(self._branch, omega)

    def slope_at_zero(self) -> float:
        return self.kappa if self.exponent == 1 else 0.0

    def features(self) -> tuple[float, ...]:
        return ()

    def magnitude(self) -> float:
        return abs(self.kappa)


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Linearly interpolated table on ascending positive frequencies.

    Frequencies outside ``[grid[0], grid[-1]]`` give zero; the table is
    never extrapolated.
    """

    grid: np.ndarray
    values: np.ndarray
    source: str = ""

    def __post_init__(self):
        g = np.array(self.grid, dtype=float)
        v = np.array(self.values, dtype=float)
        if g.ndim != 1 or g.shape != v.shape or g.size < 2:
            raise ValueError("table needs two 1-D columns of equal length >= 2")
        if not (np.isfinite(g).all() and np.isfinite(v).all()):
            raise ValueError("table contains non-finite entries")
        g.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    def _branch(self, w):
        return np.interp(w, self.grid, self.values, left=0.0, right=0.0)

    def alpha_im(self, omega):
        return _odd(self._branch, omega)

    def slope_at_zero(self) -> float:
        return 0.0

    def features(self) -> tuple[float, ...]:
        # every node is a slope discontinuity of the interpolant
        return tuple(float(w) for w in self.grid)

    def magnitude(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class Zero:
    """Absent channel."""

    def alpha_im(self, omega):
        w = _check_omega(omega)
        out = np.zeros_like(w)
        return out if out.ndim else 0.0

    def slope_at_zero(self) -> float:
        return 0.0

    def features(self) -> tuple[float, ...]:
        return ()

    def magnitude(self) -> float:
        return 0.0


PolarizabilityModel = Union[Lorentz, PowerLaw, Tabulated, Zero]


@dataclass(frozen=True)
class ParticleResponse:
    """Electric and magnetic channels; the radiation integrals use their sum."""

    electric: PolarizabilityModel
    magnetic: PolarizabilityModel = field(default_factory=Zero)

    def alpha_im(self, omega):
        return combined_alpha_im(self, omega)

    def slope_at_zero(self) -> float:
        return self.electric.slope_at_zero() + self.magnetic.slope_at_zero()

    def features(self) -> tuple[float, ...]:
        return tuple(sorted(set(self.electric.features()) | set(self.magnetic.features())))

    def magnitude(self) -> float:
        return max(self.electric.magnitude(), self.magnetic.magnitude()) or 1.0


def alpha_im(model: PolarizabilityModel, omega):
    """Odd-extended ``alpha''(omega)`` of a single channel (cm^3)."""
    return model.alpha_im(omega)


def combined_alpha_im(resp: ParticleResponse, omega):
    """``alpha''_e(omega) + alpha''_m(omega)``."""
    return resp.electric.alpha_im(omega) + resp.magnetic.alpha_im(omega)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    message: str = ""
    index: int | None = None

    def __bool__(self):
        return self.ok


def validate_model(model, omega_max: float, n_samples: int = 2001) -> ValidationReport:
    """Check passivity (``alpha'' >= 0`` for ``omega > 0``) and table structure.

    Analytic models are sampled on a log-spaced grid over ``(0, omega_max]``;
    tables are additionally checked entry by entry.
    """
    if not (math.isfinite(omega_max) and omega_max > 0):
        raise ValueError(f"omega_max must be positive, got {omega_max!r}")
    if isinstance(model, ParticleResponse):
        for name in ("electric", "magnetic"):
            rep = validate_model(getattr(model, name), omega_max, n_samples)
            if not rep:
                return ValidationReport(False, f"{name} channel: {rep.message}", rep.index)
        return ValidationReport(True)
    if isinstance(model, Tabulated):
        steps = np.diff(model.grid)
        if (steps <= 0).any():
            i = int(np.argmax(steps <= 0)) + 1
            return ValidationReport(False, f"grid not ascending at index {i}", i)
        if model.grid[0] <= 0:
            return ValidationReport(False, "grid must hold positive frequencies", 0)
        if (model.values < 0).any():
            i = int(np.argmax(model.values < 0))
            return ValidationReport(False, f"negative alpha'' = {model.values[i]:.3e} at index {i}", i)
        return ValidationReport(True)
    if isinstance(model, PowerLaw) and model.kappa < 0:
        return ValidationReport(False, f"negative kappa {model.kappa:.3e}")
    if isinstance(model, Lorentz):
        if model.alpha0 < 0 or model.gamma_d < 0:
            return ValidationReport(False, "Lorentz alpha0 and gamma_d must be non-negative")
        if model.omega0 <= 0:
            return ValidationReport(False, "Lorentz omega0 must be positive")
    w = np.geomspace(omega_max * 1e-12, omega_max, n_samples)
    vals = np.asarray(model.alpha_im(w))
    if (vals < 0).any():
        i = int(np.argmax(vals < 0))
        return ValidationReport(False, f"alpha'' < 0 at omega = {w[i]:.3e}", i)
    return ValidationReport(True)


def load_tabulated(path) -> Tabulated:
    """Read a two-column CSV ``omega_rad_per_s, alpha_im_cm3`` (``#`` comments)."""
    path = Path(path)
    try:
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except (OSError, ValueError) as exc:
        raise ValueError(f"cannot read polarizability table {path}: {exc}") from exc
    if data.shape[1] != 2:
        raise ValueError(f"{path}: expected 2 columns, found {data.shape[1]}")
    return Tabulated(data[:, 0], data[:, 1], source=str(path))


def model_to_dict(model) -> dict:
    """JSON-friendly description of a channel model."""
    if isinstance(model, Lorentz):
        return {"type": "lorentz", "alpha0_cm3": model.alpha0, "omega0_rad_s": model.omega0,
                "gamma_d_rad_s": model.gamma_d}
    if isinstance(model, PowerLaw):
        return {"type": "power_law", "kappa_cm3_s": model.kappa, "exponent": model.exponent}
    if isinstance(model, Tabulated):
        return {"type": "tabulated", "path": model.source, "points": int(model.grid.size)}
    if isinstance(model, Zero):
        return {"type": "zero"}
    raise TypeError(f"not a polarizability model: {model!r}")


_MODEL_KEYS = {
    "lorentz": {"alpha0_cm3", "omega0_rad_s", "gamma_d_rad_s"},
    "power_law": {"kappa_cm3_s", "exponent"},
    "tabulated": {"path"},
    "zero": set(),
}


def model_from_dict(spec: dict, base_dir=None):
    """Inverse of :func:`model_to_dict`; unknown or missing keys raise
    ``ValueError``. Relative table paths resolve against ``base_dir``."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise ValueError("model spec must be a mapping with a 'type' key")
    kind = spec["type"]
    if kind not in _MODEL_KEYS:
        raise ValueError(f"unknown model type {kind!r}; expected one of {sorted(_MODEL_KEYS)}")
    allowed = _MODEL_KEYS[kind] | {"type"}
    if kind == "tabulated":
        allowed = allowed | {"points"}
    extra = set(spec) - allowed
    if extra:
        raise ValueError(f"unknown keys for {kind} model: {sorted(extra)}")
    missing = _MODEL_KEYS[kind] - set(spec) - ({"exponent"} if kind == "power_law" else set())
    if missing:
        raise ValueError(f"missing keys for {kind} model: {sorted(missing)}")
    if kind == "lorentz":
        return Lorentz(float(spec["alpha0_cm3"]), float(spec["omega0_rad_s"]), float(spec["gamma_d_rad_s"]))
    if kind == "power_law":
        return PowerLaw(float(spec["kappa_cm3_s"]), int(spec.get("exponent", 1)))
    if kind == "tabulated":
        path = Path(spec["path"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return load_tabulated(path)
    return Zero()


def response_to_dict(resp: ParticleResponse) -> dict:
    return {"electric": model_to_dict(resp.electric), "magnetic": model_to_dict(resp.magnetic)}

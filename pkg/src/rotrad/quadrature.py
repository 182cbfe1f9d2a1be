"""Adaptive evaluation of the force, heating and power integrals.

The frequency integral (outer) runs over the whole real line; each node holds
an inner adaptive integral over the emission cosine ``x``. Panels are split
where the coth differences change sign or jump (``w = 0`` and the spin-shifted
zero ``g w (1 + b x) = -Omega``) and at the model resonances. At
``T1 = T2 = 0`` the frequency support is finite and the outer range is the
exact interval ``[-Omega / (g (1 - b)), 0]``; otherwise it is truncated at
``cutoff_multiplier`` thermal/spin scales, widened by the Doppler factor.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _gk
from .kernels import FOUR_PI, KinematicParams, _Kernel, bracket_shifted, bracket_unshifted
from .response import ParticleResponse
from .thermal import coth_diff_ratio
from .units import CGS, PhysicalConstants, UnitScale

__all__ = [
    "QuadratureConfig",
    "IntegralResult",
    "RadiationIntegrals",
    "radiation_integrals",
    "tangential_force",
    "heating_rate",
    "net_intensity",
    "zero_T_intensity",
    "zero_T_force",
    "energy_balance_residual",
    "dense_oracle",
    "dense_oracle_all",
    "cutoff_frequency",
    "kernel_scale",
    "conditioned_config",
]


@dataclass(frozen=True)
class QuadratureConfig:
    """Integration controls.

    ``abs_tol`` is relative to the integral of the absolute integrand, so it
    is dimensionless and scale-free.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-14
    max_depth: int = 40
    cutoff_multiplier: float = 60.0

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_depth < 4:
            raise ValueError(f"max_depth must be >= 4, got {self.max_depth}")
        if self.cutoff_multiplier < 10:
            raise ValueError(f"cutoff_multiplier must be >= 10, got {self.cutoff_multiplier}")


@dataclass(frozen=True)
class IntegralResult:
    value: float
    error_estimate: float
    evaluations: int
    converged: bool

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class RadiationIntegrals:
    """Force (dyn), heating rate and net power (erg/s) from one nested pass
    sharing a single partition."""

    force: IntegralResult
    heating: IntegralResult
    intensity: IntegralResult
    params: KinematicParams = field(repr=False)

    @property
    def converged(self) -> bool:
        return self.force.converged and self.heating.converged and self.intensity.converged

    @property
    def energy_balance_residual(self) -> float:
        V = self.params.beta * self.params.constants.c
        FV = self.force.value * V
        Q = self.heating.value
        I = self.intensity.value
        scale = max(abs(I), abs(Q), abs(FV))
        if scale == 0:
            return 0.0
        return abs(I + Q + FV) / scale


def kernel_scale(p: KinematicParams) -> UnitScale:
    """Reference scales that keep the dimensionless integrals O(1)-ish."""
    omega_ref = max(p.w1, p.w2, p.Omega)
    if omega_ref == 0:
        omega_ref = max(p.response.features() or (1.0,))
    return UnitScale(omega_ref, p.response.magnitude(), p.constants)


def cutoff_frequency(p: KinematicParams, cfg: QuadratureConfig) -> float:
    """Outer truncation ``g (1 + b) (M max(w1, w2, Omega) + Omega)`` in rad/s."""
    doppler = p.gamma * (1.0 + p.beta)
    return doppler * (cfg.cutoff_multiplier * max(p.w1, p.w2, p.Omega) + p.Omega)


def _feature_points(ker: _Kernel):
    return tuple(f / ker.omega_ref for f in ker.response.features() if f > 0)


def _outer_breakpoints(ker: _Kernel, omega_max: float, cold: bool) -> np.ndarray:
    g, b, Om = ker.gamma, ker.beta, ker.Omega
    dopplers = sorted({g * (1 - b), g, g * (1 + b)})
    feats = _feature_points(ker)
    pts = {0.0}
    if cold:
        lo = -Om / (g * (1 - b))
        pts.add(lo)
    else:
        lo = -omega_max
        pts.update((-omega_max, omega_max))
        for s in (ker.w1, ker.w2, Om):
            if s > 0:
                for k in (1.0, 4.0, 16.0):
                    pts.update((k * s, -k * s))
    for d in dopplers:
        if Om > 0:
            pts.add(-Om / d)
        for f in feats:
            pts.update((f / d, -f / d, (f - Om) / d, (-f - Om) / d))
    hi = 0.0 if cold else omega_max
    arr = np.array(sorted(p for p in pts if lo <= p <= hi))
    return arr


_INNER_PANELS = 1 << 16
_OUTER_MAX_ACTIVE = 16384


def _kink_frequencies(ker: _Kernel) -> np.ndarray:
    """Sorted particle-frame frequencies ``nu`` at which either brace term
    has a kink or a sign change: ``-Omega`` and, for every model feature
    ``f``, ``+-f`` and ``+-f - Omega``."""
    f = np.asarray(_feature_points(ker), dtype=float)
    return np.unique(np.concatenate([[-ker.Omega], f, -f, f - ker.Omega, -f - ker.Omega]))


def _inner_breakpoints(ker: _Kernel, omega: np.ndarray) -> np.ndarray:
    """Per-node breakpoints in ``x``; NaN marks unused slots.

    At each ``omega`` the cosine range maps onto the window
    ``nu in g omega [1 - b, 1 + b]``; only kink frequencies inside that
    window produce breakpoints, found by binary search.
    """
    n = omega.size
    ends = np.column_stack([np.full(n, -1.0), np.full(n, 1.0)])
    if ker.beta == 0:
        return ends
    kinks = _kink_frequencies(ker)
    gw = ker.gamma * omega
    lo = np.minimum(gw * (1 - ker.beta), gw * (1 + ker.beta))
    hi = np.maximum(gw * (1 - ker.beta), gw * (1 + ker.beta))
    i0 = np.searchsorted(kinks, lo, side="right")
    i1 = np.searchsorted(kinks, hi, side="left")
    width = int(np.max(i1 - i0, initial=0))
    if width == 0:
        return ends
    idx = i0[:, None] + np.arange(width)[None, :]
    inside = idx < i1[:, None]
    nu = kinks[np.minimum(idx, kinks.size - 1)]
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = (nu / gw[:, None] - 1.0) / ker.beta
    xs = np.where(inside & (xs > -1) & (xs < 1), xs, np.nan)
    return np.concatenate([ends, xs], axis=1)


def _inner(ker: _Kernel, omega: np.ndarray, cfg: QuadratureConfig):
    """x-integrals of the three integrands at each ``omega`` node.

    Nodes are processed in blocks of at most ``_INNER_PANELS`` initial
    panels, which bounds memory for response tables with many kinks.
    """
    brk = _inner_breakpoints(ker, omega)
    step = max(1, _INNER_PANELS // (brk.shape[1] - 1))
    parts = []
    for i in range(0, omega.size, step):
        w = omega[i:i + step]
        a, b, rows = _gk.panels_from_breakpoints(brk[i:i + step])

        def f(x, own, w=w):
            return ker.components(w[own], x)

        parts.append(_gk.integrate(f, a, b, rows, w.size, 3, rel_tol=0.1 * cfg.rel_tol,
                                   abs_tol=cfg.abs_tol, max_depth=cfg.max_depth))
    if len(parts) == 1:
        return parts[0]
    return _gk.BatchResult(*(np.concatenate([getattr(r, k) for r in parts])
                             for k in ("value", "error", "l1", "converged", "evaluations")))


def _nested(ker: _Kernel, cfg: QuadratureConfig, cold: bool, omega_max: float):
    brk = _outer_breakpoints(ker, omega_max, cold)
    if brk.size < 2:
        zero = np.zeros((1, 3))
        return _gk.BatchResult(zero, zero, zero, np.array([True]), np.zeros(1, dtype=np.int64))
    inner_ok = [True]
    inner_evals = [0]

    def f(omega, own):
        res = _inner(ker, omega, cfg)
        inner_ok[0] &= bool(res.converged.all())
        inner_evals[0] += int(res.evaluations.sum())
        return res.value, res.error

    res = _gk.integrate(f, brk[:-1], brk[1:], np.zeros(brk.size - 1, dtype=np.intp), 1, 3,
                        rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol, max_depth=cfg.max_depth,
                        max_active=_OUTER_MAX_ACTIVE)
    res.converged &= inner_ok[0]
    res.evaluations[:] = inner_evals[0]
    return res


# relative rounding noise of one coth difference, in units of machine epsilon
_COTH_NOISE_ULPS = 16.0


def conditioned_config(p: KinematicParams, cfg: QuadratureConfig) -> QuadratureConfig:
    """``cfg`` with ``rel_tol`` raised to the conditioning floor of ``p``.

    At rest without spin the integrands are proportional to the difference
    of the two occupations, so their relative accuracy is limited to about
    ``eps max(T1, T2) / |T1 - T2|`` by the representation of the
    temperatures alone. Requesting less would only flag healthy results as
    non-converged close to thermal equilibrium.
    """
    if p.beta != 0 or p.Omega != 0 or p.T1 == p.T2:
        return cfg
    cond = max(p.T1, p.T2) / abs(p.T1 - p.T2)
    floor = _COTH_NOISE_ULPS * np.finfo(float).eps * cond
    if floor <= cfg.rel_tol:
        return cfg
    return dataclasses.replace(cfg, rel_tol=floor)


@lru_cache(maxsize=512)
def radiation_integrals(p: KinematicParams, cfg: QuadratureConfig = QuadratureConfig()) -> RadiationIntegrals:
    """Force, heating rate and net power in one nested adaptive pass."""
    if p.is_equilibrium or (p.is_cold and p.Omega == 0):
        zero = IntegralResult(0.0, 0.0, 0, True)
        return RadiationIntegrals(zero, zero, zero, p)
    scale = kernel_scale(p)
    ker = _Kernel.from_params(p, scale.omega_ref, scale.alpha_ref)
    omega_max = cutoff_frequency(p, cfg) / scale.omega_ref
    res = _nested(ker, conditioned_config(p, cfg), p.is_cold, omega_max)
    conv = bool(res.converged[0])
    evals = int(res.evaluations[0])
    units = (scale.force_ref, scale.intensity_ref, scale.intensity_ref)
    out = [IntegralResult(float(res.value[0, i] * u), float(res.error[0, i] * u), evals, conv)
           for i, u in enumerate(units)]
    return RadiationIntegrals(*out, p)


def tangential_force(p: KinematicParams, cfg: QuadratureConfig = QuadratureConfig()) -> IntegralResult:
    """Radiation force along the velocity (dyn)."""
    return radiation_integrals(p, cfg).force


def heating_rate(p: KinematicParams, cfg: QuadratureConfig = QuadratureConfig()) -> IntegralResult:
    """Rate of energy absorbed by the particle, ``dQ/dt`` (erg/s)."""
    return radiation_integrals(p, cfg).heating


def net_intensity(p: KinematicParams, cfg: QuadratureConfig = QuadratureConfig()) -> IntegralResult:
    """Emitted minus absorbed power (erg/s)."""
    return radiation_integrals(p, cfg).intensity


def energy_balance_residual(p: KinematicParams, cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """``|I + dQ/dt + F V| / max(|I|, |dQ/dt|, |F V|)``; zero when all vanish."""
    return radiation_integrals(p, cfg).energy_balance_residual


@lru_cache(maxsize=256)
def _cold_integral(resp: ParticleResponse, Omega: float, cfg: QuadratureConfig,
                   constants: PhysicalConstants):
    # returns int_0^Omega xi^4 alpha''(Omega - xi) d xi in units of Omega^5 * alpha_ref
    if Omega == 0:
        return 0.0, 0.0, 0, True
    alpha_ref = resp.magnitude()

    def f(u, own):
        return (u**4 * np.asarray(resp.alpha_im(Omega * (1.0 - u))) / alpha_ref)[:, None]

    feats = sorted({1.0 - fe / Omega for fe in resp.features() if 0 < fe < Omega})
    brk = np.array([0.0, *feats, 1.0])
    res = _gk.integrate(f, brk[:-1], brk[1:], np.zeros(brk.size - 1, dtype=np.intp), 1, 1,
                        rel_tol=cfg.rel_tol * 1e-2, abs_tol=cfg.abs_tol, max_depth=cfg.max_depth)
    unit = Omega**5 * alpha_ref
    return (float(res.value[0, 0]) * unit, float(res.error[0, 0]) * unit,
            int(res.evaluations[0]), bool(res.converged[0]))


def zero_T_intensity(resp: ParticleResponse, Omega: float, cfg: QuadratureConfig = QuadratureConfig(),
                     constants: PhysicalConstants = CGS) -> IntegralResult:
    """Power radiated by a spinning particle in cold vacuum,
    ``(4 hbar / 3 pi c^3) int_0^Omega xi^4 alpha''(Omega - xi) d xi``.

    Independent of the translational speed and of the spin orientation.
    """
    if Omega < 0:
        raise ValueError(f"Omega must be >= 0, got {Omega}")
    val, err, n, ok = _cold_integral(resp, float(Omega), cfg, constants)
    pre = 4.0 * constants.hbar / (3.0 * math.pi * constants.c**3)
    return IntegralResult(pre * val, pre * err, n, ok)


def zero_T_force(resp: ParticleResponse, Omega: float, beta: float,
                 cfg: QuadratureConfig = QuadratureConfig(),
                 constants: PhysicalConstants = CGS) -> IntegralResult:
    """Cold-vacuum force ``-(beta / c) I0``, sharing the integral of
    :func:`zero_T_intensity`."""
    if not 0 <= beta < 1:
        raise ValueError(f"beta must lie in [0, 1), got {beta}")
    I0 = zero_T_intensity(resp, Omega, cfg, constants)
    k = -beta / constants.c
    return IntegralResult(k * I0.value, abs(k) * I0.error_estimate, I0.evaluations, I0.converged)


# dense tensor-grid oracle ----------------------------------------------------


def _simpson_weights(n):
    # n odd
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / 3.0


def _graded(lo, hi, n, cluster):
    """Nodes and weights of Simpson's rule on ``[lo, hi]`` after a
    polynomial grading that clusters nodes at ``lo`` ("lo"), at ``hi``
    ("hi") or at both ends ("both")."""
    s = np.linspace(0.0, 1.0, n)
    ws = _simpson_weights(n) / (n - 1)
    L = hi - lo
    if cluster == "lo":
        t, dt = s**3, 3 * s**2
    elif cluster == "hi":
        t, dt = 1 - (1 - s) ** 3, 3 * (1 - s) ** 2
    else:
        t, dt = s**2 * (3 - 2 * s), 6 * s * (1 - s)
    return lo + L * t, ws * L * dt


def dense_oracle_all(p: KinematicParams, grid_n: int = 2048, cutoff_multiplier: float = 60.0):
    """Force, heating rate and power from fixed tensor grids, no adaptivity.

    Each of the two brace terms is integrated in its own particle-frame
    frequency ``nu = g w (1 + b x) + shift`` (``shift`` = 0 or ``Omega``),
    where both coth singularities sit at fixed ``nu = 0`` and ``nu = shift``.
    Graded Simpson rules run in ``nu`` on the panels those points delimit and
    a uniform Simpson rule in ``x``.
    """
    if grid_n < 64:
        raise ValueError(f"grid_n must be >= 64, got {grid_n}")
    if p.is_equilibrium or (p.is_cold and p.Omega == 0):
        return 0.0, 0.0, 0.0
    n = grid_n + 1 if grid_n % 2 == 0 else grid_n
    scale = kernel_scale(p)
    k = p.constants
    g, b = p.gamma, p.beta
    Om = p.Omega / scale.omega_ref
    w1, w2 = p.w1 / scale.omega_ref, p.w2 / scale.omega_ref
    alpha = lambda nu: np.asarray(p.response.alpha_im(nu * scale.omega_ref)) / scale.alpha_ref
    slope = p.response.slope_at_zero() * scale.omega_ref / scale.alpha_ref
    omega_max = cutoff_multiplier * max(w1, w2, Om) + Om
    nu_max = g * (1 + b) * omega_max + Om

    x = np.linspace(-1.0, 1.0, n)
    wx = _simpson_weights(n) * (2.0 / (n - 1))
    a_x = g * (1 + b * x)
    c2 = math.cos(p.theta) ** 2
    s2 = math.sin(p.theta) ** 2
    brackets = (
        (1 - b * b) * (1 - x * x) * c2 + ((1 + b * b) * (1 + x * x) + 4 * b * x) * s2 / 2,
        (1 - b * b) * (1 - x * x) * s2 + ((1 + b * b) * (1 + x * x) + 4 * b * x) * (1 + c2) / 2,
    )
    totals = np.zeros(3)
    for shift, bracket in ((0.0, brackets[0]), (Om, brackets[1])):
        if p.is_cold:
            if shift == 0:
                continue
            panels = [(0.0, shift, "both")]
        else:
            cuts = sorted({0.0, shift})
            panels = [(-nu_max, cuts[0], "hi")]
            if cuts[-1] > cuts[0]:
                panels.append((cuts[0], cuts[-1], "both"))
            panels.append((cuts[-1], nu_max, "lo"))
        for lo, hi, cl in panels:
            nu, wnu = _graded(lo, hi, n, cl)
            inner = np.zeros((3, n))
            # x rows processed in blocks to bound memory
            for j0 in range(0, n, 256):
                sl = slice(j0, min(n, j0 + 256))
                ax = a_x[sl, None]
                om = (nu[None, :] - shift) / ax
                d, _ = coth_diff_ratio(om, w2, nu[None, :], w1)
                p_pole = (nu[None, :] == 0) & (w1 > 0)
                bg_pole = (om == 0) & (w2 > 0)
                val = alpha(nu)[None, :] * np.where(p_pole | bg_pole, 0.0, d)
                val = np.where(p_pole & ~bg_pole, -2.0 * w1 * slope, val)
                body = om**4 * val / ax * bracket[sl, None]
                row = body @ wnu
                xs = x[sl]
                inner[0, sl] = -xs * row
                inner[1, sl] = (1 + b * xs) * row
                inner[2, sl] = -row
            totals += inner @ wx
    pre = g / FOUR_PI
    return (float(pre * totals[0] * scale.force_ref), float(pre * totals[1] * scale.intensity_ref),
            float(pre * totals[2] * scale.intensity_ref))


def dense_oracle(integrand: str, p: KinematicParams, grid_n: int = 2048) -> float:
    """Tensor-grid value of ``"force"``, ``"heat"`` or ``"intensity"``."""
    idx = {"force": 0, "heat": 1, "intensity": 2}
    if integrand not in idx:
        raise ValueError(f"unknown integrand {integrand!r}")
    return dense_oracle_all(p, grid_n)[idx[integrand]]

"""Run configuration: a nested mapping read from JSON or YAML, with dotted
``--set`` overrides. Unknown keys are rejected."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .dynamics import ConstantHeatCapacity, PowerLawHeatCapacity, SolverConfig
from .kernels import KinematicParams
from .quadrature import QuadratureConfig
from .response import ParticleResponse, model_from_dict
from .state import Environment, ParticleState

__all__ = ["ConfigError", "RunConfig", "load_config", "apply_override", "DEFAULTS"]


class ConfigError(ValueError):
    """Malformed configuration; the message names the offending key."""


DEFAULTS: dict = {
    "particle": {
        "mass_g": 8.4e-18,
        "radius_cm": 1.0e-6,
        "T1_K": 0.0,
        "Omega_rad_s": 1.0e12,
        "theta_rad": math.pi / 4,
    },
    "background": {"T2_K": 0.0},
    "motion": {"beta": 0.5},
    "response": {
        "electric": {"type": "lorentz", "alpha0_cm3": 1.0e-21, "omega0_rad_s": 2.0e13, "gamma_d_rad_s": 1.0e13},
        "magnetic": {"type": "zero"},
    },
    "quadrature": {"rel_tol": 1e-8, "abs_tol": 1e-14, "max_depth": 40, "cutoff_multiplier": 60.0},
    "evolve": {
        "t_span_s": 1.0,
        "heat_capacity": {"type": "constant", "C_erg_per_K": 1.0e-10},
        "rtol": 1e-8,
        "max_step_s": None,
        "max_steps": 1_000_000,
        "heating_frame": "lab",
    },
    "spectrum": {"kind": "omega", "points": None},
    "verify": {
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
    },
    "output": {"path": None, "format": None},
}

_FREE_FORM = {("response", "electric"), ("response", "magnetic"), ("evolve", "heat_capacity")}


def _check_keys(data, template, path=()):
    if not isinstance(data, dict):
        raise ConfigError(f"{'.'.join(path) or '<root>'}: expected a mapping, got {type(data).__name__}")
    for key, value in data.items():
        here = (*path, str(key))
        if key not in template:
            raise ConfigError(f"unknown key {'.'.join(here)!r}")
        if here in _FREE_FORM:
            if not isinstance(value, dict):
                raise ConfigError(f"{'.'.join(here)}: expected a mapping")
            continue
        if isinstance(template[key], dict):
            _check_keys(value, template[key], here)


def _merge(base, extra):
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and (k not in ("electric", "magnetic", "heat_capacity")):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(data: dict, assignment: str) -> dict:
    """Apply ``a.b.c=value``; the value is parsed as JSON when possible."""
    key, sep, raw = assignment.partition("=")
    if not sep or not key:
        raise ConfigError(f"--set expects KEY=VALUE, got {assignment!r}")
    parts = key.strip().split(".")
    node = data
    for p in parts[:-1]:
        if p not in node or not isinstance(node[p], dict):
            node[p] = {}
        node = node[p]
    node[parts[-1]] = _parse_value(raw.strip())
    return data


def _num(section, key, value, kind=float, allow_none=False):
    where = f"{section}.{key}"
    if value is None and allow_none:
        return None
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got a boolean")
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(f"{where}: expected a number, got {value!r}") from None
    if not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {type(value).__name__}")
    if kind is int:
        if float(value) != int(value):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return int(value)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{where}: must be finite")
    return value


def _heat_model(spec):
    kind = spec.get("type")
    if kind == "constant":
        extra = set(spec) - {"type", "C_erg_per_K"}
        if extra:
            raise ConfigError(f"unknown keys in evolve.heat_capacity: {sorted(extra)}")
        C = _num("evolve.heat_capacity", "C_erg_per_K", spec.get("C_erg_per_K"))
        if C <= 0:
            raise ConfigError("evolve.heat_capacity.C_erg_per_K must be positive")
        return ConstantHeatCapacity(C)
    if kind == "power_law":
        extra = set(spec) - {"type", "C0_erg_per_K", "T_ref_K", "exponent"}
        if extra:
            raise ConfigError(f"unknown keys in evolve.heat_capacity: {sorted(extra)}")
        vals = [_num("evolve.heat_capacity", k, spec.get(k)) for k in ("C0_erg_per_K", "T_ref_K", "exponent")]
        if vals[0] <= 0 or vals[1] <= 0:
            raise ConfigError("evolve.heat_capacity: C0_erg_per_K and T_ref_K must be positive")
        return PowerLawHeatCapacity(*vals)
    raise ConfigError(f"evolve.heat_capacity.type must be 'constant' or 'power_law', got {kind!r}")


@dataclass
class RunConfig:
    """Validated run configuration (CGS, unit-suffixed keys)."""

    state: ParticleState
    env: Environment
    response: ParticleResponse
    quadrature: QuadratureConfig
    solver: SolverConfig
    heat_capacity: object
    t_span: float
    spectrum_kind: str
    spectrum_points: int | None
    verify: dict
    output_path: str | None
    output_format: str | None
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def params(self) -> KinematicParams:
        s = self.state
        return KinematicParams(s.beta, s.theta, s.Omega, s.T1, self.env.T2, self.response)

    @classmethod
    def from_dict(cls, data: dict, base_dir=None) -> "RunConfig":
        _check_keys(data, DEFAULTS)
        d = _merge(DEFAULTS, data)
        pt, bg, mo = d["particle"], d["background"], d["motion"]
        try:
            theta = _num("particle", "theta_rad", pt["theta_rad"])
            if not 0 <= theta <= math.pi:
                raise ConfigError(f"particle.theta_rad must lie in [0, pi], got {theta}")
            state = ParticleState(
                m=_num("particle", "mass_g", pt["mass_g"]),
                beta=_num("motion", "beta", mo["beta"]),
                T1=_num("particle", "T1_K", pt["T1_K"]),
                Omega=_num("particle", "Omega_rad_s", pt["Omega_rad_s"]),
                theta=theta,
                R=_num("particle", "radius_cm", pt["radius_cm"]),
            )
            env = Environment(_num("background", "T2_K", bg["T2_K"]))
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"particle/motion/background: {exc}") from exc
        models = {}
        for ch in ("electric", "magnetic"):
            try:
                models[ch] = model_from_dict(d["response"][ch], base_dir)
            except ValueError as exc:
                raise ConfigError(f"response.{ch}: {exc}") from exc
        q = d["quadrature"]
        try:
            quad = QuadratureConfig(
                rel_tol=_num("quadrature", "rel_tol", q["rel_tol"]),
                abs_tol=_num("quadrature", "abs_tol", q["abs_tol"]),
                max_depth=_num("quadrature", "max_depth", q["max_depth"], int),
                cutoff_multiplier=_num("quadrature", "cutoff_multiplier", q["cutoff_multiplier"]),
            )
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"quadrature: {exc}") from exc
        ev = d["evolve"]
        t_span = _num("evolve", "t_span_s", ev["t_span_s"])
        if t_span < 0:
            raise ConfigError("evolve.t_span_s must be >= 0")
        max_step = _num("evolve", "max_step_s", ev["max_step_s"], allow_none=True)
        try:
            solver = SolverConfig(
                rtol=_num("evolve", "rtol", ev["rtol"]),
                max_step=math.inf if max_step is None else max_step,
                max_steps=_num("evolve", "max_steps", ev["max_steps"], int),
                heating_frame=str(ev["heating_frame"]),
            )
        except ValueError as exc:
            raise ConfigError(f"evolve: {exc}") from exc
        sp = d["spectrum"]
        if sp["kind"] not in ("omega", "angular"):
            raise ConfigError(f"spectrum.kind must be 'omega' or 'angular', got {sp['kind']!r}")
        points = _num("spectrum", "points", sp["points"], int, allow_none=True)
        if points is not None and points < 2:
            raise ConfigError("spectrum.points must be >= 2")
        vf = dict(d["verify"])
        for k, v in vf.items():
            if k == "oracle_scope":
                if v not in ("sample", "all"):
                    raise ConfigError(f"verify.oracle_scope must be 'sample' or 'all', got {v!r}")
            elif k in ("oracle_grid", "dynamics_steps", "seed"):
                vf[k] = _num("verify", k, v, int)
            else:
                vf[k] = _num("verify", k, v)
        out = d["output"]
        fmt = out["format"]
        if fmt not in (None, "csv", "json"):
            raise ConfigError(f"output.format must be 'csv' or 'json', got {fmt!r}")
        return cls(state, env, ParticleResponse(models["electric"], models["magnetic"]), quad, solver,
                   _heat_model(d["evolve"]["heat_capacity"]), t_span, sp["kind"], points, vf,
                   out["path"], fmt, d)


def load_config(path=None, overrides=()) -> RunConfig:
    """Read ``path`` (JSON, or YAML for ``.yaml``/``.yml``), apply
    ``overrides`` and validate."""
    data: dict = {}
    base_dir = None
    if path is not None:
        path = Path(path)
        base_dir = path.parent
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
        try:
            if path.suffix.lower() in (".yaml", ".yml"):
                data = yaml.safe_load(text) or {}
            else:
                data = json.loads(text) if text.strip() else {}
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            where = f"{path}:{mark.line + 1}:{mark.column + 1}" if mark else str(path)
            raise ConfigError(f"{where}: {getattr(exc, 'problem', exc)}") from exc
    for assignment in overrides:
        apply_override(data, assignment)
    return RunConfig.from_dict(data, base_dir)

"""``rotrad`` command line: compute, spectrum, evolve, verify.

Exit codes: 0 success, 1 configuration or I/O error, 2 a quadrature or
solver result did not converge, 3 an identity check failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .dynamics import evolve
from .quadrature import radiation_integrals, zero_T_force, zero_T_intensity
from .spectra import SeriesIOError, angular_distribution, format_series, intensity_spectrum, write_series
from .units import validate_regime
from .verify import format_report, run_suite

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED, EXIT_IDENTITY = 0, 1, 2, 3

TRAJECTORY_COLUMNS = ("t", "beta", "m", "T1", "F_x", "Q_dot", "I", "residual")


def _emit(text: str, path, stdout) -> None:
    if path is None:
        (stdout or sys.stdout).write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise SeriesIOError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _result_dict(r):
    return {"value": r.value, "error_estimate": r.error_estimate, "converged": r.converged}


def cmd_compute(cfg, output=None, fmt=None, stdout=None) -> int:
    p = cfg.params
    res = radiation_integrals(p, cfg.quadrature)
    out = {
        "F_x_dyn": _result_dict(res.force),
        "Q_dot_erg_s": _result_dict(res.heating),
        "I_erg_s": _result_dict(res.intensity),
        "energy_balance_residual": res.energy_balance_residual,
        "converged": res.converged,
        "regime_warnings": validate_regime(cfg.state, cfg.env),
    }
    if p.is_cold:
        I0 = zero_T_intensity(p.response, p.Omega, cfg.quadrature)
        F0 = zero_T_force(p.response, p.Omega, p.beta, cfg.quadrature)
        out["zero_T_intensity_erg_s"] = _result_dict(I0)
        out["zero_T_force_dyn"] = _result_dict(F0)
        out["converged"] = out["converged"] and I0.converged
    _emit(json.dumps(out, indent=2) + "\n", output, stdout)
    return EXIT_OK if out["converged"] else EXIT_NONCONVERGED


def cmd_spectrum(cfg, kind=None, output=None, fmt=None, stdout=None) -> int:
    kind = kind or cfg.spectrum_kind
    p = cfg.params
    extra = {} if cfg.spectrum_points is None else {"n": cfg.spectrum_points}
    if kind == "omega":
        series = intensity_spectrum(p, cfg=cfg.quadrature, **extra)
    else:
        series = angular_distribution(p, cfg=cfg.quadrature, **extra)
    if output is None:
        (stdout or sys.stdout).write(format_series(series, fmt or "csv"))
    else:
        write_series(series, output, fmt)
    return EXIT_OK if series.metadata.get("converged", True) else EXIT_NONCONVERGED


def trajectory_csv(traj) -> str:
    lines = [f"# status={traj.status}", f"# converged={json.dumps(traj.converged)}",
             f"# rejected_steps={traj.rejected_steps}", ",".join(TRAJECTORY_COLUMNS)]
    cols = (traj.t, traj.beta, traj.m, traj.T1, traj.force, traj.heating, traj.intensity, traj.residual)
    for row in zip(*cols):
        lines.append(",".join("%.17g" % v for v in row))
    return "\n".join(lines) + "\n"


def trajectory_json(traj) -> str:
    cols = (traj.t, traj.beta, traj.m, traj.T1, traj.force, traj.heating, traj.intensity, traj.residual)
    data = {"status": traj.status, "converged": traj.converged, "rejected_steps": traj.rejected_steps}
    data.update({name: col.tolist() for name, col in zip(TRAJECTORY_COLUMNS, cols)})
    return json.dumps(data, indent=1) + "\n"


def cmd_evolve(cfg, output=None, fmt=None, stdout=None) -> int:
    traj = evolve(cfg.state, cfg.env, cfg.response, cfg.heat_capacity, cfg.t_span, cfg.solver, cfg.quadrature)
    if fmt is None and output is not None and str(output).lower().endswith(".json"):
        fmt = "json"
    text = trajectory_json(traj) if fmt == "json" else trajectory_csv(traj)
    _emit(text, output, stdout)
    return EXIT_OK if traj.converged and traj.status == "ok" else EXIT_NONCONVERGED


def cmd_verify(cfg, output=None, fmt=None, stdout=None) -> int:
    results = run_suite(cfg.response, cfg.quadrature, cfg.verify)
    if fmt == "json":
        text = json.dumps([r.__dict__ for r in results], indent=1) + "\n"
    else:
        text = format_report(results)
    _emit(text, output, stdout)
    return EXIT_OK if all(r.passed for r in results) else EXIT_IDENTITY


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON or YAML run configuration")
    common.add_argument("--set", metavar="KEY=VALUE", action="append", default=[], dest="overrides",
                        help="override a dotted config key (repeatable)")
    common.add_argument("--output", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    parser = argparse.ArgumentParser(prog="rotrad", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("compute", parents=[common], help="force, heating rate and net power")
    sp = sub.add_parser("spectrum", parents=[common], help="spectral or angular distribution")
    sp.add_argument("--kind", choices=("omega", "angular"))
    sub.add_parser("evolve", parents=[common], help="integrate velocity, mass and temperature")
    sub.add_parser("verify", parents=[common], help="run the identity suite")
    return parser


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config, args.overrides)
    except ConfigError as exc:
        stderr.write(f"rotrad: config error: {exc}\n")
        return EXIT_CONFIG
    output = args.output or cfg.output_path
    fmt = args.format or cfg.output_format
    try:
        if args.command == "compute":
            return cmd_compute(cfg, output, fmt, stdout)
        if args.command == "spectrum":
            return cmd_spectrum(cfg, args.kind, output, fmt, stdout)
        if args.command == "evolve":
            return cmd_evolve(cfg, output, fmt, stdout)
        return cmd_verify(cfg, output, fmt, stdout)
    except (SeriesIOError, OSError) as exc:
        stderr.write(f"rotrad: {exc}\n")
        return EXIT_CONFIG
    except ValueError as exc:
        stderr.write(f"rotrad: invalid input: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

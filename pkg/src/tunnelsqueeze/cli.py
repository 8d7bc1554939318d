"""Command-line front end.

Subcommands: ``sweep``, ``optimize``, ``calibrate``, ``reproduce``.

Settings come from built-in defaults, then an optional flat ``--config``
file (``key = value``, keys named like the long flags with underscores),
then command-line flags, which win.

Exit codes: 0 success, 1 a reproduction headline missed its tolerance,
2 invalid configuration or input, 3 I/O failure, 4 numerical failure.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from .calibrate import CalibrationFit, FitError, fit_drive_amplitude, fit_undriven
from .constants import E_CHARGE, photon_energy
from .io import (
    InputFormatError,
    read_config,
    read_curve_csv,
    read_json,
    write_json,
    write_table,
)
from .noise import (
    DriveParams,
    JunctionParams,
    ParameterError,
    noise_temperature,
    to_reduced,
    vacuum_noise,
)
from .optimize import (
    SweepSpec,
    optimize_bias_at_fixed_drive,
    optimize_squeeze,
    sweep,
    sweep_workers,
    undriven_curve,
)
from .specfun import ValidatedRangeError

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4

DEFAULTS = {
    "freq_ghz": "7.2",
    "temp_mk": "28",
    "resistance_ohm": "70",
    "p": "1",
    "vdc_uv": "0",
    "vac_uv": "0",
    "phase_rad": "0",
    "format": "csv",
    "axis": "dc_bias",
    "lo_uv": "-120",
    "hi_uv": "120",
    "points": "481",
    "u_min": "-4",
    "u_max": "4",
    "z_min": "0",
    "z_max": "4",
    "grid": "201",
}

SWEEP_HEADER = [
    "abscissa[V]", "S[hbar*omega/R]", "S_tilde[hbar*omega/R]", "var_A[hbar*omega/R]",
    "var_B[hbar*omega/R]", "min_quadrature[hbar*omega/R]", "squeeze_ratio[1]",
    "squeeze_db[dB]", "vacuum_reference[hbar*omega/R]",
]
KELVIN_HEADER = [
    "abscissa[V]", "T_S[K]", "T_S_tilde[K]", "T_A[K]", "T_B[K]", "T_min_quadrature[K]",
    "T_vacuum[K]",
]

# reference headline values: ratio, dB below vacuum, tolerance on the ratio
HEADLINES = {
    "t0_p1": (0.62, -2.09, 0.01),
    "t0_p2": (0.73, -1.37, 0.01),
    "fig2": (0.74, -1.31, 0.02),
    "fig3": (0.82, -0.86, 0.02),
}
FIGURES = {
    "fig2": {"vac_uv": 46.0, "p": 1},
    "fig3": {"vac_uv": 36.0, "p": 2},
}


class RunConfig:
    """Resolved settings for one command."""

    def __init__(self, command, values):
        self.command = command
        self.values = values

    def _float(self, key):
        try:
            return float(self.values[key])
        except (KeyError, TypeError, ValueError):
            raise ParameterError(key, f"expected a number, got {self.values.get(key)!r}") from None

    def _int(self, key):
        raw = self.values.get(key)
        try:
            return int(str(raw))
        except (TypeError, ValueError):
            raise ParameterError(key, f"expected an integer, got {raw!r}") from None

    @property
    def junction(self):
        return JunctionParams(self._float("resistance_ohm"), self._float("temp_mk") * 1e-3)

    @property
    def drive(self):
        return DriveParams(
            measurement_frequency=self._float("freq_ghz") * 1e9,
            harmonic_p=self._int("p"),
            dc_bias=self._float("vdc_uv") * 1e-6,
            ac_amplitude=self._float("vac_uv") * 1e-6,
            quadrature_phase=self._float("phase_rad"),
        )

    @property
    def sweep(self):
        axis = self.values["axis"]
        return SweepSpec(axis, self._float("lo_uv") * 1e-6, self._float("hi_uv") * 1e-6,
                         self._int("points"), self.junction, self.drive)

    @property
    def format(self):
        fmt = self.values["format"]
        if fmt not in ("csv", "json"):
            raise ParameterError("format", f"must be csv or json, got {fmt!r}")
        return fmt

    @property
    def output_path(self):
        return self.values.get("output")

    def comment_block(self):
        return [f"{k} = {v}" for k, v in sorted(self.values.items()) if v is not None]


def _add_common(parser):
    parser.add_argument("--config", help="flat key = value configuration file")
    parser.add_argument("--output", help="output file (directory for reproduce)")
    parser.add_argument("--format", choices=["csv", "json"])
    parser.add_argument("--vdc-uv", help="dc bias [uV]")
    parser.add_argument("--vac-uv", help="ac drive amplitude [uV]")
    parser.add_argument("--freq-ghz", help="detection frequency omega/2pi [GHz]")
    parser.add_argument("--temp-mk", help="electron temperature [mK]")
    parser.add_argument("--resistance-ohm", help="junction resistance [ohm]")
    parser.add_argument("--p", choices=["1", "2"], help="drive at 2*omega/p")
    parser.add_argument("--phase-rad", help="quadrature phase [rad]")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tunnelsqueeze",
        description="Quadrature noise and squeezing of an ac+dc biased tunnel junction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="noise curves along dc bias or ac amplitude")
    _add_common(p_sweep)
    p_sweep.add_argument("--axis", choices=["dc_bias", "ac_amplitude"])
    p_sweep.add_argument("--lo-uv", help="start of the sweep [uV]")
    p_sweep.add_argument("--hi-uv", help="end of the sweep [uV]")
    p_sweep.add_argument("--points", help="number of points")

    p_opt = sub.add_parser("optimize", help="best squeezing over reduced bias and drive")
    _add_common(p_opt)
    p_opt.add_argument("--u-min")
    p_opt.add_argument("--u-max")
    p_opt.add_argument("--z-min")
    p_opt.add_argument("--z-max")
    p_opt.add_argument("--grid", help="coarse grid points per axis")

    p_cal = sub.add_parser("calibrate", help="fit gain, amplifier noise, temperature, V_ac")
    _add_common(p_cal)
    p_cal.add_argument("--input", required=True, help="noise curve CSV")
    p_cal.add_argument("--driven", help="detuned-drive curve CSV, fitted after --input")
    p_cal.add_argument("--prior", help="JSON calibration; --input is then the driven curve")

    p_rep = sub.add_parser("reproduce", help="regenerate figure data and headline optima")
    _add_common(p_rep)
    p_rep.add_argument("target", choices=["fig2", "fig3", "t0_optima", "table_of_optima"])
    return parser


def resolve(args):
    values = dict(DEFAULTS)
    if args.config:
        values.update(read_config(args.config))
    for key, val in vars(args).items():
        if key in ("command", "config") or val is None:
            continue
        values[key] = val
    return RunConfig(args.command, values)


def _sweep_rows(spec, workers):
    results = sweep(spec, workers=workers)
    s_plain = undriven_curve(spec)
    v = vacuum_noise(to_reduced(spec.junction, spec.drive).theta_T)
    rows = []
    for (a, r), s in zip(results, s_plain):
        rows.append([a, s, r.s_tilde, r.var_a, r.var_b, r.min_quadrature, r.squeeze_ratio,
                     r.squeeze_db, v])
    return rows


def _kelvin_rows(rows, junction, drive):
    out = []
    for row in rows:
        a, s, st, va, vb, vm, _, _, vac = row
        out.append([a, *noise_temperature(np.array([s, st, va, vb, vm, vac]).clip(0),
                                          junction, drive)])
    return out


def _write_rows(path, fmt, comments, header, rows):
    if fmt == "json":
        write_json(path, {"config": comments,
                          "rows": [dict(zip(header, r)) for r in rows]})
    else:
        with open(path, "w", encoding="utf-8") as fh:
            write_table(fh, comments, header, rows)


def _out(cfg, default):
    return cfg.output_path or default


def cmd_sweep(cfg):
    spec = cfg.sweep
    rows = _sweep_rows(spec, sweep_workers())
    comments = ["tunnelsqueeze sweep", "units: volts; noise in hbar*omega/R", *cfg.comment_block()]
    _write_rows(_out(cfg, f"sweep.{cfg.format}"), cfg.format, comments, SWEEP_HEADER, rows)
    return EXIT_OK


def _optimum_dict(opt, drive):
    e_photon = photon_energy(drive.measurement_frequency)
    return {
        "u_star": opt.u_star,
        "z_star": opt.z_star,
        "ratio": opt.ratio,
        "db": opt.db,
        "converged": opt.converged,
        "evaluations": opt.evaluations,
        "v_dc_star": opt.u_star * e_photon / E_CHARGE,
        "v_ac_star": opt.z_star * photon_energy(drive.drive_frequency) / E_CHARGE,
    }


def cmd_optimize(cfg):
    j, d = cfg.junction, cfg.drive
    point = to_reduced(j, d)
    bounds_u = (cfg._float("u_min"), cfg._float("u_max"))
    bounds_z = (cfg._float("z_min"), cfg._float("z_max"))
    opt = optimize_squeeze(point.theta_T, point.p, bounds_u, bounds_z, grid=cfg._int("grid"))
    report = {
        "input": {"theta_T": point.theta_T, "p": point.p, "bounds_u": list(bounds_u),
                  "bounds_z": list(bounds_z), "temperature_K": j.electron_temperature,
                  "measurement_frequency_Hz": d.measurement_frequency},
        **_optimum_dict(opt, d),
    }
    write_json(_out(cfg, "optimum.json"), report)
    return EXIT_OK


def cmd_calibrate(cfg):
    v = cfg.values
    drive = cfg.drive
    if v.get("prior"):
        fixed = _fit_from_json(v["prior"])
        curve = read_curve_csv(v["input"])
        fit = fit_drive_amplitude(curve, fixed, 2.0 * curve.frequency / drive.harmonic_p)
    else:
        curve = read_curve_csv(v["input"])
        fit = fit_undriven(curve)
        if v.get("driven"):
            driven = read_curve_csv(v["driven"])
            fit = fit_drive_amplitude(driven, fit, 2.0 * driven.frequency / drive.harmonic_p)
    write_json(_out(cfg, "calibration.json"), fit.to_dict())
    return EXIT_OK


def _fit_from_json(path):
    data = read_json(path)
    try:
        return CalibrationFit.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputFormatError(path, None, f"not a calibration report: {exc}") from None


def _check(name, ratio, extra=None):
    target, db_ref, tol = HEADLINES[name]
    entry = {
        "ratio": ratio,
        "db": float(10.0 * np.log10(ratio)),
        "target_ratio": target,
        "target_db": db_ref,
        "tolerance": tol,
        "pass": bool(abs(ratio - target) <= tol),
    }
    if extra:
        entry.update(extra)
    return entry


def _reproduce_figure(name, cfg, outdir):
    values = dict(cfg.values)
    values.update({k: str(v) for k, v in FIGURES[name].items()})
    values.update({"freq_ghz": "7.2", "temp_mk": "28", "resistance_ohm": "70",
                   "vdc_uv": "0", "axis": "dc_bias", "lo_uv": "-120", "hi_uv": "120",
                   "points": "481"})
    fig = RunConfig("sweep", values)
    spec = fig.sweep
    rows = _sweep_rows(spec, sweep_workers())
    comments = [f"tunnelsqueeze reproduce {name}", "units: volts; noise in hbar*omega/R",
                *fig.comment_block()]
    _write_rows(outdir / f"{name}.csv", "csv", comments, SWEEP_HEADER, rows)
    with open(outdir / f"{name}_kelvin.csv", "w", encoding="utf-8") as fh:
        write_table(fh, [f"tunnelsqueeze reproduce {name}", "noise temperatures R*S/2k_B"],
                    KELVIN_HEADER, _kelvin_rows(rows, spec.junction, spec.drive))
    point = to_reduced(spec.junction, spec.drive)
    opt = optimize_bias_at_fixed_drive(point.z, point.theta_T, point.p)
    return _check(name, opt.ratio, {
        "u_star": opt.u_star,
        "v_dc_star": opt.u_star * photon_energy(spec.drive.measurement_frequency) / E_CHARGE,
        "z": point.z, "theta_T": point.theta_T,
    })


def _reproduce_t0():
    out = {}
    for name, p in (("t0_p1", 1), ("t0_p2", 2)):
        opt = optimize_squeeze(0.0, p)
        out[name] = _check(name, opt.ratio, {"u_star": opt.u_star, "z_star": opt.z_star,
                                             "converged": opt.converged})
    return out


def cmd_reproduce(cfg):
    target = cfg.values["target"]
    outdir = Path(cfg.output_path or "reproduce_out")
    outdir.mkdir(parents=True, exist_ok=True)
    summary = {}
    if target in ("fig2", "table_of_optima"):
        summary["fig2"] = _reproduce_figure("fig2", cfg, outdir)
    if target in ("fig3", "table_of_optima"):
        summary["fig3"] = _reproduce_figure("fig3", cfg, outdir)
    if target in ("t0_optima", "table_of_optima"):
        summary.update(_reproduce_t0())
    all_pass = all(v["pass"] for v in summary.values())
    write_json(outdir / f"summary_{target}.json", {"target": target, "all_pass": all_pass,
                                                   "checks": summary})
    for name, v in summary.items():
        status = "PASS" if v["pass"] else "FAIL"
        print(f"{status} {name}: ratio {v['ratio']:.4f} (target {v['target_ratio']} "
              f"+/- {v['tolerance']}), {v['db']:.2f} dB (target {v['target_db']})")
    return EXIT_OK if all_pass else EXIT_CHECK_FAILED


COMMANDS = {
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "calibrate": cmd_calibrate,
    "reproduce": cmd_reproduce,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except (ParameterError, ValidatedRangeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (FitError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

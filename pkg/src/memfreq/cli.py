"""Command-line entry point: ``memfreq {simulate,analyze,sweep,dc}``.

Exit codes: 0 success, 1 invalid arguments or unreadable input,
2 numerical failure (or unsettled sweep under ``--strict``).
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis, io
from .models import load_params, make_model
from .simulate import SimulationError, dc_step_run, run
from .waveform import PRESETS, WaveformSpec, build_staircase


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _common(p, out_required=True):
    p.add_argument("--out", required=out_required, help="output file")
    p.add_argument("--model", choices=("relax", "drift", "resistor"), default="relax")
    p.add_argument("--params", help="JSON file of model parameters (name -> number)")
    p.add_argument("--integrator-step", type=float, default=None, help="RK4 step, seconds")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="memfreq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run a staircase protocol and write a trace CSV")
    _common(p)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--substeps", "-x", type=int, help="readings per level")
    p.add_argument("--dt", type=float, help="dwell per reading, s")
    p.add_argument("--dv", type=float, help="voltage increment, V")
    p.add_argument("--vmax", type=float, help="peak voltage, V")
    p.add_argument("--pad", type=float, help="auto-zero pad before each reading, s")
    p.add_argument("--n-total", type=int, help="check the total number of readings")
    p.add_argument("--time-scale", type=float, default=1.0,
                   help="multiply dt and pad by this factor")

    p = sub.add_parser("analyze", help="frequency slices and hysteresis report of a trace")
    p.add_argument("trace")
    p.add_argument("--out", required=True, help="report JSON")
    p.add_argument("--tsv", help="slice plot data (default: <out>.tsv)")

    p = sub.add_parser("sweep", help="hysteresis versus sine-drive frequency")
    _common(p)
    p.add_argument("--vmax", type=float, default=1.0)
    p.add_argument("--omega", help="comma-separated frequencies in Hz")
    p.add_argument("--omega-decades", default="1e-2:1e2",
                   help="lo:hi range of the dimensionless 2*pi*f*tau (default %(default)s)")
    p.add_argument("--points-per-decade", type=int, default=5)
    p.add_argument("--samples-per-period", type=int, default=64)
    p.add_argument("--settle-periods", type=int, default=8)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--tsv", help="(omega, H) plot data (default: <out>.tsv)")
    p.add_argument("--strict", action="store_true", help="exit 2 if any frequency is unsettled")

    p = sub.add_parser("dc", help="step response from 0 V and its DC features")
    _common(p)
    p.add_argument("--vstep", type=float, default=0.5)
    p.add_argument("--hold", type=float, help="hold after the step, s (default 20 time scales)")
    p.add_argument("--sample-dt", type=float, help="reading interval, s (default time scale/100)")
    p.add_argument("--epsilon", type=float, default=0.01, help="settling threshold")
    p.add_argument("--features", help="DC features JSON (default: <out>.json)")
    return parser


def _model(args):
    params = load_params(args.params) if args.params else None
    return make_model(args.model, params)


def _staircase_spec(args) -> WaveformSpec:
    base = PRESETS[args.preset] if args.preset else None
    fields = {}
    for name, attr in (("substeps", "substeps"), ("dt", "dt"), ("dv", "dv"),
                       ("v_max", "vmax"), ("autozero_pad", "pad")):
        value = getattr(args, attr)
        if value is None:
            if base is None:
                raise UsageError(f"--{attr} is required without --preset")
            value = getattr(base, name)
        fields[name] = value
    spec = WaveformSpec(**fields, n_total=args.n_total)
    if not (args.time_scale > 0 and math.isfinite(args.time_scale)):
        raise UsageError("--time-scale must be positive")
    return spec.scaled(args.time_scale) if args.time_scale != 1.0 else spec


def cmd_simulate(args) -> int:
    model = _model(args)
    spec = _staircase_spec(args)
    trace = run(model, build_staircase(spec), args.integrator_step)
    io.write_trace(trace, args.out)
    print(f"wrote {len(trace)} readings over {spec.n_levels} levels to {args.out}")
    return 0


def cmd_analyze(args) -> int:
    trace = io.read_trace(args.trace)
    slices = analysis.extract_slices(trace)
    report = analysis.hysteresis_report(slices)
    io.write_report(report, args.out)
    io.write_plot_data(slices, args.tsv or io.default_sibling(args.out, ".tsv"))
    pinch = "none" if report.pinch_current is None else f"{report.pinch_current:.6g}"
    fit_r = "inf" if report.fit_resistance is None else f"{report.fit_resistance:.12g}"
    print(f"monotone_in_x={str(report.monotone_in_x).lower()} "
          f"pinch_current={pinch} fit_resistance={fit_r}")
    return 0


def _sweep_omegas(args, model):
    if args.omega:
        try:
            return [float(w) for w in args.omega.split(",") if w.strip()]
        except ValueError:
            raise UsageError(f"bad --omega list {args.omega!r}") from None
    try:
        lo, hi = (float(x) for x in args.omega_decades.split(":"))
    except ValueError:
        raise UsageError(f"bad --omega-decades {args.omega_decades!r}") from None
    if not (0 < lo < hi) or args.points_per_decade < 1:
        raise UsageError("need 0 < lo < hi and --points-per-decade >= 1")
    n = int(round(math.log10(hi / lo) * args.points_per_decade)) + 1
    return list(np.logspace(math.log10(lo), math.log10(hi), n)
                / (2.0 * math.pi * model.time_scale))


def cmd_sweep(args) -> int:
    model = _model(args)
    omegas = _sweep_omegas(args, model)
    if len(omegas) < 5:
        raise UsageError(f"a sweep needs at least 5 frequencies, got {len(omegas)}")
    report = analysis.frequency_sweep(
        model, args.vmax, omegas, args.samples_per_period, args.settle_periods,
        args.integrator_step, workers=args.workers)
    io.write_report(report, args.out)
    io.write_plot_data(report, args.tsv or io.default_sibling(args.out, ".tsv"))
    w0 = "absent" if report.omega_zero is None else f"{report.omega_zero:.6g}"
    print(f"omega_zero={w0} fingerprint_2={str(report.fingerprint_2).lower()} "
          f"fingerprint_3={str(report.fingerprint_3).lower()} unsettled={len(report.unsettled)}")
    if args.strict and report.unsettled:
        print(f"memfreq: {len(report.unsettled)} frequencies did not settle", file=sys.stderr)
        return 2
    return 0


def cmd_dc(args) -> int:
    model = _model(args)
    scale = model.time_scale
    hold = args.hold if args.hold is not None else 20.0 * scale
    sample_dt = args.sample_dt if args.sample_dt is not None else scale / 100.0
    trace = dc_step_run(model, args.vstep, hold, sample_dt, args.integrator_step)
    feats = analysis.dc_features(trace, args.epsilon)
    io.write_trace(trace, args.out)
    io.write_report(feats, args.features or io.default_sibling(args.out, ".json"))
    print(f"i_max={feats.i_max:.6g} t_peak={feats.t_peak:.6g} "
          f"i_inf={feats.i_inf:.6g} tau_inf={feats.tau_inf:.6g}")
    return 0


COMMANDS = {"simulate": cmd_simulate, "analyze": cmd_analyze, "sweep": cmd_sweep, "dc": cmd_dc}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 1
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SimulationError as exc:
        print(f"memfreq: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"memfreq: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

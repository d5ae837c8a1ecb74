"""Command-line entry point: ``icm <command> ...``.

Exit codes: 0 success, 1 validation/input error, 2 numerical error,
3 property or tolerance violation.
"""

import argparse
import math
import sys
from dataclasses import replace

import numpy as np

from . import harness
from .errors import IcmError, NumericalError, PropertyViolation, ValidationError


def _emit(header, rows, out):
    if out:
        harness.write_csv(header, rows, out)
    else:
        harness.write_csv(header, rows, sys.stdout)


def _scenario(args, analyses=None):
    s = harness.load_scenario(args.scenario)
    changes = {}
    if args.n_segments is not None:
        changes["n_segments"] = args.n_segments
    if args.order is not None:
        changes["order"] = args.order
    if getattr(args, "inductance_aware", False):
        changes["inductance_aware"] = True
    if analyses is not None:
        changes["analyses"] = frozenset(analyses)
    return replace(s, **changes) if changes else s


def _log(msg):
    print(msg, file=sys.stderr)


def cmd_run(args):
    s = _scenario(args)
    row = harness.run_scenario(s)
    harness.emit_csv([row], args.out or sys.stdout)
    if row.sim_vs_closed_form is not None:
        _log(f"{s.name}: t63_sim vs tau_d relative difference {100 * row.sim_vs_closed_form:+.3f}%")


def cmd_delay(args):
    from .analytic import abc_coefficients, characteristic_impedance, line_delay, series_coefficients

    s = _scenario(args, {"closed_form"})
    row = harness.run_scenario(s)
    harness.emit_csv([row], args.out or sys.stdout)
    t = s.totals
    est = line_delay(t, s.term, s.inductance_aware)
    abc = abc_coefficients(t.R_T, t.C_T, s.term)
    series = series_coefficients(abc, s.order)
    _log(f"{s.name}: tau_d = {est.tau_d:.6g} s, t50 = {est.t50:.6g} s ({est.mode_label})")
    _log(f"  Z0 = {characteristic_impedance(t):.6g} ohm, a = {abc.a:.6g}, b = {abc.b:.6g}, c = {abc.c:.6g}")
    _log("  f(u) coefficients: " + ", ".join(f"{k:.6g}" for k in series.coefficients))


def cmd_simulate(args):
    from . import ladder

    s = _scenario(args, {"simulate"})
    trace = ladder.simulate(s.ladder_config())
    m = ladder.extract_metrics(trace)
    _emit(harness.TRACE_HEADER, harness.trace_rows(trace), args.out)
    _log(
        f"{s.name}: t50 = {m.t50:.6g} s, t63 = {m.t63:.6g} s, overshoot = {m.overshoot_pct:.3f}%, "
        f"settled = {m.settled} (observed {trace.observed})"
    )


def cmd_sweep(args):
    spec = harness.load_sweep(args.sweepfile)
    changes = {}
    if args.n_segments is not None:
        changes["n_segments"] = args.n_segments
    if args.order is not None:
        changes["order"] = args.order
    if changes:
        spec = replace(spec, base=replace(spec.base, **changes))
    result = harness.run_sweep(spec, workers=args.jobs)
    harness.emit_csv(result.rows, args.out or sys.stdout)
    for key, val in result.flags.items():
        _log(f"{key}: {val}")
    if result.violations:
        for idx, msg in result.violations:
            _log(f"VIOLATION {msg}: " + ",".join(result.rows[idx].csv_fields()))
        raise PropertyViolation(f"{len(result.violations)} sweep claim(s) violated")


MERIT_HEADER = (
    "scenario",
    "xi",
    "omega0_rad_s",
    "regime",
    "pole1_re",
    "pole1_im",
    "pole2_re",
    "pole2_im",
    "inductive_tau_s",
)


def cmd_merit(args):
    from .merit import damping_factor, inductive_time_constant
    from .units import format_float as f

    s = _scenario(args, {"merit"})
    t = s.totals
    rep = damping_factor(t)
    p1, p2 = rep.poles
    tau_l = inductive_time_constant(t.L_T, s.term.R_S, t.R_T) if s.term.R_S + t.R_T > 0 else math.inf
    row = [s.name, f(rep.xi), f(rep.omega0), rep.regime, f(p1.real), f(p1.imag), f(p2.real), f(p2.imag), f(tau_l)]
    _emit(MERIT_HEADER, [row], args.out)
    _log(f"{s.name}: xi = {rep.xi:.6g} ({rep.regime}); rc model {'adequate' if rep.rc_accurate else 'NOT adequate'}")


ENERGY_HEADER = ("scenario", "e_bit_J", "throughput_bps", "tep_W", "swing_ratio")


def cmd_energy(args):
    from .merit import throughput_energy
    from .units import format_float as f

    s = _scenario(args, {"energy"})
    row = harness.run_scenario(s)
    tau = s.throughput_multiplier / row.throughput
    rep = throughput_energy(tau, row.e_bit, s.effective_swing, s.throughput_multiplier)
    _emit(ENERGY_HEADER, [[s.name, f(rep.e_bit), f(rep.throughput), f(rep.tep), f(rep.swing_ratio)]], args.out)


def cmd_table4(args):
    rows = harness.load_table4(args.csv)
    report = harness.reproduce_table4(rows)
    _emit(harness.TABLE4_REPORT_HEADER, harness.table4_rows_csv(report), args.out)
    bad = []
    for r in report:
        if r.vm_delta_pct is not None and r.vm_delta_pct >= args.vm_tol_pct:
            bad.append(f"length {r.length:g} m: VM delta {r.vm_delta_pct:.3f}% >= {args.vm_tol_pct}%")
        if r.reduction_delta_pp is not None and r.reduction_delta_pp >= args.reduction_tol_pp:
            bad.append(f"length {r.length:g} m: reduction delta {r.reduction_delta_pp:.3f} pp >= {args.reduction_tol_pp} pp")
    for msg in bad:
        _log("VIOLATION " + msg)
    if bad:
        raise PropertyViolation(f"{len(bad)} CM/VM table row(s) outside tolerance")


def cmd_freq(args):
    from .exact import frequency_response
    from .units import format_float as f

    s = _scenario(args, {"exact_freq"})
    t = s.totals
    if args.points < 0:
        raise ValidationError("--points must be >= 0", field="points")
    if args.points == 0:
        grid = []
    elif args.points == 1:
        grid = [args.wmin]
    else:
        grid = np.logspace(math.log10(args.wmin), math.log10(args.wmax), args.points)
    samples = frequency_response(t.R_T, t.C_T, s.term, grid)
    _emit(harness.FREQ_HEADER, [[f(x.omega), f(x.magnitude), f(x.phase)] for x in samples], args.out)


def build_parser():
    p = argparse.ArgumentParser(prog="icm", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, target="scenario", help=None):
        sp = sub.add_parser(name, help=help)
        sp.add_argument(target)
        sp.add_argument("--out", help="output CSV path (default: stdout)")
        sp.add_argument("--n-segments", type=int, default=None, help="ladder sections for simulation")
        sp.add_argument("--order", type=int, default=None, help="series expansion order")
        sp.set_defaults(func=fn)
        return sp

    sp = add("run", cmd_run, help="run every analysis selected in a scenario")
    sp.add_argument("--inductance-aware", action="store_true")
    sp = add("delay", cmd_delay, help="closed-form dominant-pole delay")
    sp.add_argument("--inductance-aware", action="store_true")
    add("simulate", cmd_simulate, help="transient ladder simulation; writes the trace")
    sp = add("sweep", cmd_sweep, target="sweepfile", help="parameter sweep with monotonicity checks")
    sp.add_argument("--jobs", type=int, default=1, help="rows evaluated in parallel")
    add("merit", cmd_merit, help="damping factor and poles of the lumped model")
    add("energy", cmd_energy, help="energy per bit and throughput-energy product")
    sp = add("table4", cmd_table4, target="csv", help="reproduce the VM/CM comparison table")
    sp.add_argument("--vm-tol-pct", type=float, default=1.0)
    sp.add_argument("--reduction-tol-pp", type=float, default=0.3)
    sp = add("freq", cmd_freq, help="exact frequency response")
    sp.add_argument("--wmin", type=float, default=1e6, help="lowest angular frequency (rad/s)")
    sp.add_argument("--wmax", type=float, default=1e12, help="highest angular frequency (rad/s)")
    sp.add_argument("--points", type=int, default=61)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except PropertyViolation as exc:
        _log(f"icm: {exc}")
        return 3
    except NumericalError as exc:
        _log(f"icm: numerical error: {exc}")
        return 2
    except (IcmError, OSError) as exc:
        _log(f"icm: {exc}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

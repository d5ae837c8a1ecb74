"""Scenario files, sweeps, Table-4 reproduction and CSV output.

Scenario files are INI-style (``[section]`` headers, ``key = value``).
Dimensioned values must carry a unit suffix, e.g.::

    [scenario]
    name = cnt_10mm
    analyses = closed_form, simulate

    [line]
    r = 1 kohm/m
    l = 12.9129 nH/mm
    c = 100 pF/m
    d = 10 mm

    [termination]
    R_S = 0 ohm
    load = short
"""

import configparser
import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from . import ladder
from .analytic import line_delay
from .errors import IcmError, ParseError, UnsupportedLoadError, ValidationError
from .exact import bandwidth_3db
from .merit import CM_SWING_RATIO, damping_factor, energy_per_bit
from .params import (
    LinePerUnit,
    LineTotals,
    Open,
    ResCap,
    Resistive,
    Short,
    Termination,
    load_line_params,
    totals_from_per_unit,
)
from .units import format_float, parse_quantity

ANALYSES = ("closed_form", "exact_freq", "simulate", "merit", "energy")
SWEEP_VARIABLES = {"d": "m", "R_L": "ohm", "C_L": "F", "R_S": "ohm"}
RESULT_HEADER = (
    "scenario",
    "swept_value",
    "tau_d_s",
    "t50_sim_s",
    "t63_sim_s",
    "xi",
    "e_bit_J",
    "throughput_bps",
    "reduction_vs_vm_pct",
)
TRACE_HEADER = ("t_s", "v_load_V", "i_source_A")
FREQ_HEADER = ("omega_rad_s", "mag", "phase_rad")


@dataclass(frozen=True)
class Scenario:
    name: str
    line: LinePerUnit
    d: float
    term: Termination
    Vdd: float = 1.0
    analyses: frozenset = frozenset({"closed_form"})
    inductance_aware: bool = False
    n_segments: int = ladder.DEFAULT_SEGMENTS
    order: int = 8
    swing_ratio: Optional[float] = None
    C_int: Optional[float] = None
    throughput_multiplier: float = 1.0
    t_end: Optional[float] = None
    dt: Optional[float] = None

    def __post_init__(self):
        if not self.analyses:
            raise ValidationError("scenario selects no analyses", field="analyses")
        unknown = set(self.analyses) - set(ANALYSES)
        if unknown:
            raise ValidationError(f"unknown analyses {sorted(unknown)}", field="analyses")
        if not self.d > 0:
            raise ValidationError(f"length must be > 0, got {self.d!r}", field="d")

    @property
    def totals(self) -> LineTotals:
        return totals_from_per_unit(self.line, self.d)

    @property
    def effective_swing(self):
        if self.swing_ratio is not None:
            return self.swing_ratio
        return CM_SWING_RATIO if self.term.is_short else 1.0

    def ladder_config(self):
        return ladder.LadderConfig(
            per_unit=self.line,
            d=self.d,
            term=self.term,
            n_segments=self.n_segments,
            Vdd=self.Vdd,
            t_end=self.t_end,
            dt=self.dt,
        )


@dataclass(frozen=True)
class ResultRow:
    scenario: str
    swept_value: Optional[float] = None
    tau_d: Optional[float] = None
    t50_sim: Optional[float] = None
    t63_sim: Optional[float] = None
    xi: Optional[float] = None
    e_bit: Optional[float] = None
    throughput: Optional[float] = None
    reduction_vs_vm_pct: Optional[float] = None
    # not part of the CSV schema
    bandwidth_3db: Optional[float] = field(default=None, compare=False)
    overshoot_pct: Optional[float] = field(default=None, compare=False)

    @property
    def sim_vs_closed_form(self):
        """(t63_sim - tau_d) / tau_d when both are present."""
        if self.tau_d is None or self.t63_sim is None:
            return None
        return (self.t63_sim - self.tau_d) / self.tau_d

    def csv_fields(self):
        vals = (
            self.swept_value,
            self.tau_d,
            self.t50_sim,
            self.t63_sim,
            self.xi,
            self.e_bit,
            self.throughput,
            self.reduction_vs_vm_pct,
        )
        return [self.scenario] + ["" if v is None else format_float(v) for v in vals]


# --- scenario files ---------------------------------------------------------


def _parser(path):
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        raise ParseError(f"{path}: {exc}") from None
    return cp


def _q(section, key, dim, default=None, required=False):
    if key not in section:
        if required:
            raise ParseError(f"[{section.name}] missing key {key!r}")
        return default
    try:
        return parse_quantity(section[key], dim)
    except ParseError as exc:
        raise ParseError(f"[{section.name}] {key}: {exc}") from None


def _bool(section, key, default=False):
    if key not in section:
        return default
    try:
        return section.getboolean(key)
    except ValueError:
        raise ParseError(f"[{section.name}] {key}: not a boolean: {section[key]!r}") from None


def _line_from_section(sec, base_dir):
    d = _q(sec, "d", "m", required=True)
    if "file" in sec:
        records = load_line_params(base_dir / sec["file"])
        material = sec.get("material")
        node = sec.get("node")
        for rec in records:
            if (material is None or rec.material == material) and (node is None or rec.node_label == node):
                return rec, d
        raise ValidationError(f"no line record for material={material!r} node={node!r} in {sec['file']}", field="line")
    material = sec.get("material", "other")
    node = sec.get("node", "")
    if "R_T" in sec or "C_T" in sec:
        totals = LineTotals(
            R_T=_q(sec, "R_T", "ohm", 0.0),
            L_T=_q(sec, "L_T", "H", 0.0),
            C_T=_q(sec, "C_T", "F", required=True),
            d=d,
        )
        return totals.per_unit(material, node), d
    line = LinePerUnit(
        r=_q(sec, "r", "ohm/m", 0.0),
        l=_q(sec, "l", "H/m", 0.0),
        c=_q(sec, "c", "F/m", required=True),
        material=material,
        node_label=node,
    )
    return line, d


def _termination_from_section(sec):
    R_S = _q(sec, "R_S", "ohm", required=True)
    kind = sec.get("load", "open").strip().lower()
    if kind == "open":
        load = Open()
    elif kind == "short":
        load = Short()
    elif kind == "resistive":
        load = Resistive(_q(sec, "R_L", "ohm", required=True))
    elif kind == "rescap":
        load = ResCap(_q(sec, "R_L", "ohm", math.inf), _q(sec, "C_L", "F", 0.0))
    else:
        raise ParseError(f"[termination] unknown load {kind!r}")
    return Termination(R_S, load)


def _scenario_from_parser(cp, base_dir, default_name):
    for name in ("line", "termination"):
        if not cp.has_section(name):
            raise ParseError(f"missing [{name}] section")
    meta = cp["scenario"] if cp.has_section("scenario") else {}
    analyses = meta.get("analyses", "closed_form")
    analyses = frozenset(a.strip() for a in analyses.split(",") if a.strip())
    line, d = _line_from_section(cp["line"], base_dir)
    term = _termination_from_section(cp["termination"])
    for name in ("drive", "options"):
        if not cp.has_section(name):
            cp.add_section(name)
    drive, opts = cp["drive"], cp["options"]

    def _num(key, default):
        return _q(opts, key, None, default) if key in opts else default

    n_segments = _num("n_segments", ladder.DEFAULT_SEGMENTS)
    order = _num("order", 8)
    return Scenario(
        name=meta.get("name", default_name),
        line=line,
        d=d,
        term=term,
        Vdd=_q(drive, "Vdd", "V", 1.0),
        analyses=analyses,
        inductance_aware=_bool(opts, "inductance_aware"),
        n_segments=int(n_segments),
        order=int(order),
        swing_ratio=_num("swing_ratio", None),
        C_int=_q(opts, "C_int", "F"),
        throughput_multiplier=_num("throughput_multiplier", 1.0),
        t_end=_q(opts, "t_end", "s"),
        dt=_q(opts, "dt", "s"),
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    return _scenario_from_parser(_parser(path), path.parent, path.stem)


# --- running ----------------------------------------------------------------


def _attach_name(exc, name):
    if exc.args:
        exc.args = (f"scenario {name!r}: {exc.args[0]}",) + exc.args[1:]
    return exc


def run_scenario(s: Scenario, swept_value=None) -> ResultRow:
    """Run the analyses selected by ``s`` and collect one result row."""
    try:
        return _run(s, swept_value)
    except IcmError as exc:
        raise _attach_name(exc, s.name)


def _run(s, swept_value):
    totals = s.totals
    out = {}
    tau = None
    if "closed_form" in s.analyses or "energy" in s.analyses:
        try:
            est = line_delay(totals, s.term, s.inductance_aware)
            vm = line_delay(totals, Termination(s.term.R_S, Open()), s.inductance_aware)
            tau = est.tau_d
        except UnsupportedLoadError:
            if "closed_form" in s.analyses:
                raise
        if "closed_form" in s.analyses:
            out["tau_d"] = tau
            out["reduction_vs_vm_pct"] = 100.0 * (1.0 - tau / vm.tau_d)
    if "exact_freq" in s.analyses:
        out["bandwidth_3db"] = bandwidth_3db(totals.R_T, totals.C_T, s.term)
    if "simulate" in s.analyses:
        m = ladder.extract_metrics(ladder.simulate(s.ladder_config()))
        out.update(t50_sim=m.t50, t63_sim=m.t63, overshoot_pct=m.overshoot_pct)
    if "merit" in s.analyses:
        out["xi"] = damping_factor(totals).xi
    if "energy" in s.analyses:
        c_int = s.C_int if s.C_int is not None else totals.C_T
        out["e_bit"] = energy_per_bit(c_int, s.Vdd, s.effective_swing)
        basis = tau if tau is not None else out.get("t63_sim")
        if basis is None:
            raise UnsupportedLoadError("energy analysis needs a closed-form delay or a simulation for throughput")
        out["throughput"] = s.throughput_multiplier / basis
    return ResultRow(scenario=s.name, swept_value=swept_value, **out)


@dataclass(frozen=True)
class SweepSpec:
    base: Scenario
    variable: str
    values: tuple
    max_spread_pct: Optional[float] = None

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ValidationError(f"cannot sweep {self.variable!r}; choose from {sorted(SWEEP_VARIABLES)}", field="variable")
        if len(self.values) < 2:
            raise ValidationError("a sweep needs at least two values", field="values")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValidationError("sweep values must be strictly ascending", field="values")
        for v in self.values:
            self.scenario_at(v)  # validity range check

    def scenario_at(self, value) -> Scenario:
        base, var = self.base, self.variable
        if var == "d":
            return replace(base, d=value)
        if var == "R_S":
            return replace(base, term=Termination(value, base.term.load))
        load = base.term.load
        if var == "R_L":
            if isinstance(load, Resistive):
                new = Resistive(value)
            elif isinstance(load, ResCap):
                new = ResCap(value, load.C_L)
            else:
                raise ValidationError("R_L sweep needs a resistive or rescap load", field="R_L")
        else:
            if isinstance(load, ResCap):
                new = ResCap(load.R_L, value)
            elif isinstance(load, Resistive):
                new = ResCap(load.R_L, value)
            elif isinstance(load, Open):
                new = ResCap(math.inf, value)
            else:
                raise ValidationError("C_L sweep on a short is meaningless; use rescap with a small R_L", field="C_L")
        return replace(base, term=Termination(base.term.R_S, new))


@dataclass(frozen=True)
class SweepResult:
    rows: list
    flags: dict
    violations: list

    @property
    def ok(self):
        return not self.violations


def _monotone(rows, attr, increasing):
    """Return the index of the first row breaking strict monotonicity, or None."""
    vals = [getattr(r, attr) for r in rows]
    if any(v is None for v in vals):
        return None
    for i in range(1, len(vals)):
        if (vals[i] <= vals[i - 1]) if increasing else (vals[i] >= vals[i - 1]):
            return i
    return None


def run_sweep(spec: SweepSpec, workers=1) -> SweepResult:
    """One result row per swept value, in input order, plus claim checks.

    Claims: length sweeps have increasing delay and decreasing throughput;
    R_L and R_S sweeps have increasing delay; an optional ``max_spread_pct``
    bounds the relative spread of the delay over the whole sweep.
    """
    scenarios = [spec.scenario_at(v) for v in spec.values]

    def one(item):
        i, (v, sc) = item
        try:
            return run_scenario(sc, swept_value=v)
        except IcmError as exc:
            if exc.args:
                exc.args = (f"sweep row {i}: {exc.args[0]}",) + exc.args[1:]
            raise

    items = list(enumerate(zip(spec.values, scenarios)))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, items))
    else:
        rows = [one(it) for it in items]

    claims = []
    if spec.variable in ("d", "R_L", "R_S"):
        claims += [("tau_d", True), ("t50_sim", True), ("t63_sim", True)]
    if spec.variable == "d":
        claims.append(("throughput", False))
    flags, violations = {}, []
    for attr, inc in claims:
        if getattr(rows[0], attr) is None:
            continue
        bad = _monotone(rows, attr, inc)
        key = f"{attr}_{'increasing' if inc else 'decreasing'}"
        flags[key] = bad is None
        if bad is not None:
            violations.append((bad, f"{attr} not strictly {'increasing' if inc else 'decreasing'} at row {bad}"))
    if spec.max_spread_pct is not None:
        attr = "t50_sim" if rows[0].t50_sim is not None else "tau_d"
        vals = [getattr(r, attr) for r in rows]
        spread = 100.0 * (max(vals) - min(vals)) / min(vals)
        flags[f"{attr}_spread_pct"] = spread
        if spread >= spec.max_spread_pct:
            worst = max(range(len(vals)), key=lambda i: abs(vals[i] - vals[0]))
            violations.append((worst, f"{attr} spread {spread:.3f}% exceeds {spec.max_spread_pct}%"))
    return SweepResult(rows=rows, flags=flags, violations=violations)


def load_sweep(path) -> SweepSpec:
    path = Path(path)
    cp = _parser(path)
    if not cp.has_section("sweep"):
        raise ParseError(f"{path}: missing [sweep] section")
    base = _scenario_from_parser(cp, path.parent, path.stem)
    sec = cp["sweep"]
    var = sec.get("variable", "").strip()
    if var not in SWEEP_VARIABLES:
        raise ParseError(f"[sweep] variable must be one of {sorted(SWEEP_VARIABLES)}, got {var!r}")
    dim = SWEEP_VARIABLES[var]
    raw = [v.strip() for v in sec.get("values", "").split(",") if v.strip()]
    values = tuple(parse_quantity(v, dim) for v in raw)
    spread = _q(sec, "max_spread_pct", None)
    return SweepSpec(base=base, variable=var, values=values, max_spread_pct=spread)


# --- CM/VM delay table ------------------------------------------------------

TABLE4_HEADER = ("tier", "length_um", "cm_delay_ps", "vm_delay_ps", "reduction_pct")
TABLE4_REPORT_HEADER = (
    "length_m",
    "cm_delay_s",
    "r1c1_s",
    "vm_pred_s",
    "vm_printed_s",
    "vm_delta_pct",
    "reduction_pred_pct",
    "reduction_printed_pct",
    "reduction_delta_pp",
    "reduction_from_columns_pct",
)


@dataclass(frozen=True)
class Table4Row:
    length: float
    cm_delay: float
    r1c1: float
    vm_pred: float
    reduction_pred_pct: float
    vm_printed: Optional[float] = None
    reduction_printed_pct: Optional[float] = None

    @property
    def vm_delta_pct(self):
        if self.vm_printed is None:
            return None
        return 100.0 * abs(self.vm_pred - self.vm_printed) / self.vm_printed

    @property
    def reduction_delta_pp(self):
        if self.reduction_printed_pct is None:
            return None
        return abs(self.reduction_pred_pct - self.reduction_printed_pct)

    @property
    def reduction_from_columns_pct(self):
        """Reduction recomputed from the CM and printed VM columns."""
        if self.vm_printed is None:
            return None
        return 100.0 * (self.vm_printed - self.cm_delay) / self.vm_printed


def reproduce_table4(cm_column):
    """Predict the voltage-mode column from current-mode delays.

    ``cm_column`` holds ``(length, cm_delay)`` pairs, optionally extended by
    the printed VM delay and reduction percentage.  In the R_S << R1 limit
    a short load gives R1C1/6 and an open load R1C1/2, so R1C1 = 6 * CM and
    VM = 3 * CM.
    """
    out = []
    for entry in cm_column:
        length, cm = entry[0], entry[1]
        vm_printed = entry[2] if len(entry) > 2 else None
        red_printed = entry[3] if len(entry) > 3 else None
        if not cm > 0:
            raise ValidationError(f"CM delay must be positive, got {cm!r}", field="cm_delay")
        # closed form for both limits from the inferred R1C1
        r1c1 = 6.0 * cm
        vm = r1c1 / 2.0
        cm_model = r1c1 / 6.0
        out.append(Table4Row(length, cm, r1c1, vm, 100.0 * (1.0 - cm_model / vm), vm_printed, red_printed))
    return out


def load_table4(path):
    """Read the transcribed table; returns (length_m, cm_s, vm_s, reduction_pct) tuples."""
    rows = []
    with open(path) as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.reader(lines)
    header = tuple(h.strip() for h in next(reader, ()))
    if header != TABLE4_HEADER:
        raise ParseError(f"{path}: expected header {','.join(TABLE4_HEADER)!r}")
    for i, rec in enumerate(reader, start=2):
        if len(rec) != len(TABLE4_HEADER):
            raise ParseError(f"expected {len(TABLE4_HEADER)} fields", i)
        try:
            length = float(rec[1]) * 1e-6
            cm = float(rec[2]) * 1e-12
            vm = float(rec[3]) * 1e-12 if rec[3].strip() else None
            red = float(rec[4]) if rec[4].strip() else None
        except ValueError as exc:
            raise ParseError(str(exc), i) from None
        rows.append((length, cm, vm, red))
    return rows


def table4_rows_csv(report):
    out = []
    for r in report:
        vals = (
            r.length,
            r.cm_delay,
            r.r1c1,
            r.vm_pred,
            r.vm_printed,
            r.vm_delta_pct,
            r.reduction_pred_pct,
            r.reduction_printed_pct,
            r.reduction_delta_pp,
            r.reduction_from_columns_pct,
        )
        out.append(["" if v is None else format_float(v) for v in vals])
    return out


# --- CSV --------------------------------------------------------------------


def write_csv(header, rows, destination=None):
    """Write ``rows`` under ``header``; returns the text when destination is None.

    ``destination`` may be a path or an open text file.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    text = buf.getvalue()
    if destination is None:
        return text
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text)
    return None


def emit_csv(rows, destination=None):
    return write_csv(RESULT_HEADER, [r.csv_fields() for r in rows], destination)


def read_results(path):
    """Parse a result CSV back into :class:`ResultRow` objects."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader, ()))
        if header != RESULT_HEADER:
            raise ParseError(f"{path}: unexpected header {','.join(header)!r}", 1)
        names = [f.name for f in fields(ResultRow)][1:9]
        rows = []
        for i, rec in enumerate(reader, start=2):
            if len(rec) != len(RESULT_HEADER):
                raise ParseError(f"expected {len(RESULT_HEADER)} fields", i)
            try:
                vals = {n: (float(v) if v != "" else None) for n, v in zip(names, rec[1:])}
            except ValueError as exc:
                raise ParseError(str(exc), i) from None
            rows.append(ResultRow(scenario=rec[0], **vals))
    return rows


def trace_rows(trace):
    return [
        (format_float(t), format_float(v), format_float(i))
        for t, v, i in zip(trace.times, trace.v_load, trace.i_source)
    ]

"""Physical line parameters, terminations and their file formats.

All values are SI: ohm, henry, farad, metre.  Geometry records are kept as
reference data only; nothing here converts geometry into r, l, c.
"""

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from .errors import ParseError, ValidationError
from .units import format_float

LINE_HEADER = ("material", "node", "r_per_m", "l_per_m", "c_per_m")
GEOMETRY_HEADER = ("node", "tier", "width_m", "thickness_m", "spacing_m", "height_m", "dielectric")
TIERS = ("local", "intermediate", "global")


def _check_finite(name, value):
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}", field=name)


@dataclass(frozen=True)
class LinePerUnit:
    """Per-unit-length resistance, inductance and capacitance of a wire."""

    r: float
    l: float
    c: float
    material: str = "other"
    node_label: str = ""

    def __post_init__(self):
        for name in ("r", "l", "c"):
            _check_finite(name, getattr(self, name))
        if self.r < 0:
            raise ValidationError(f"r must be >= 0, got {self.r!r}", field="r")
        if self.l < 0:
            raise ValidationError(f"l must be >= 0, got {self.l!r}", field="l")
        if self.c <= 0:
            raise ValidationError(f"c must be > 0, got {self.c!r}", field="c")


@dataclass(frozen=True)
class LineTotals:
    R_T: float
    L_T: float
    C_T: float
    d: float

    def __post_init__(self):
        for name in ("R_T", "L_T", "C_T", "d"):
            _check_finite(name, getattr(self, name))
        if self.d <= 0:
            raise ValidationError(f"length must be > 0, got {self.d!r}", field="d")
        if self.R_T < 0 or self.L_T < 0:
            raise ValidationError("R_T and L_T must be >= 0", field="R_T" if self.R_T < 0 else "L_T")
        if self.C_T <= 0:
            raise ValidationError(f"C_T must be > 0, got {self.C_T!r}", field="C_T")

    def per_unit(self, material="other", node_label=""):
        return LinePerUnit(self.R_T / self.d, self.L_T / self.d, self.C_T / self.d, material, node_label)


def totals_from_per_unit(p: LinePerUnit, d: float) -> LineTotals:
    """Scale per-unit values by the length ``d`` (m)."""
    if not (d > 0) or not math.isfinite(d):
        raise ValidationError(f"length must be a positive finite number, got {d!r}", field="d")
    return LineTotals(R_T=p.r * d, L_T=p.l * d, C_T=p.c * d, d=d)


# --- terminations -----------------------------------------------------------


@dataclass(frozen=True)
class Resistive:
    R_L: float

    def __post_init__(self):
        if not (self.R_L > 0) or not math.isfinite(self.R_L):
            raise ValidationError(f"R_L must be positive and finite, got {self.R_L!r}", field="R_L")


@dataclass(frozen=True)
class Open:
    """High-impedance (voltage-mode) receiver."""


@dataclass(frozen=True)
class Short:
    """Ideal current-mode receiver: zero input impedance."""


@dataclass(frozen=True)
class ResCap:
    """Load resistor in parallel with a load capacitor.

    ``R_L = inf`` leaves only the capacitor; ``R_L = 0`` degenerates to a
    short, which makes the capacitor electrically invisible.
    """

    R_L: float
    C_L: float

    def __post_init__(self):
        if math.isnan(self.R_L) or self.R_L < 0:
            raise ValidationError(f"R_L must be >= 0, got {self.R_L!r}", field="R_L")
        if not math.isfinite(self.C_L) or self.C_L < 0:
            raise ValidationError(f"C_L must be >= 0 and finite, got {self.C_L!r}", field="C_L")


Load = Union[Resistive, Open, Short, ResCap]


@dataclass(frozen=True)
class Termination:
    R_S: float
    load: Load = field(default_factory=Open)

    def __post_init__(self):
        if not math.isfinite(self.R_S) or self.R_S < 0:
            raise ValidationError(f"R_S must be >= 0 and finite, got {self.R_S!r}", field="R_S")
        if not isinstance(self.load, (Resistive, Open, Short, ResCap)):
            raise ValidationError(f"unknown load {self.load!r}", field="load")

    @property
    def is_short(self):
        return isinstance(self.load, Short) or (isinstance(self.load, ResCap) and self.load.R_L == 0)

    @property
    def load_conductance(self):
        """Shunt conductance at the far end; ``inf`` for a short."""
        load = self.load
        if isinstance(load, Short):
            return math.inf
        if isinstance(load, Open):
            return 0.0
        if load.R_L == 0:
            return math.inf
        return 1.0 / load.R_L

    @property
    def load_capacitance(self):
        return self.load.C_L if isinstance(self.load, ResCap) else 0.0


@dataclass(frozen=True)
class GeometrySpec:
    """One row of an interconnect-dimension table (reference data only)."""

    node: str
    tier: str
    width: float
    thickness: float
    spacing: float
    height: float
    dielectric_const: float

    def __post_init__(self):
        if self.tier not in TIERS:
            raise ValidationError(f"tier must be one of {TIERS}, got {self.tier!r}", field="tier")
        for name in ("width", "thickness", "spacing", "height"):
            v = getattr(self, name)
            _check_finite(name, v)
            if v <= 0:
                raise ValidationError(f"{name} must be > 0, got {v!r}", field=name)
        _check_finite("dielectric_const", self.dielectric_const)
        if self.dielectric_const < 1:
            raise ValidationError(
                f"dielectric_const must be >= 1, got {self.dielectric_const!r}", field="dielectric_const"
            )


# --- CSV loading ------------------------------------------------------------


def _data_rows(path, header):
    """Yield ``(line_number, fields)`` for non-comment rows after the header."""
    text = Path(path).read_text()
    seen_header = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = [f.strip() for f in next(csv.reader([stripped]))]
        if not seen_header:
            if tuple(fields) != header:
                raise ParseError(f"expected header {','.join(header)!r}, got {stripped!r}", lineno)
            seen_header = True
            continue
        if len(fields) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(fields)}", lineno)
        yield lineno, fields
    if not seen_header:
        raise ParseError("missing header", 1)


def _float(text, lineno, name):
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"field {name}: not a number: {text!r}", lineno) from None


def _validated(cls, lineno, **kwargs):
    try:
        return cls(**kwargs)
    except ValidationError as exc:
        raise ValidationError(f"line {lineno}: {exc}", field=exc.field) from None


def load_line_params(path) -> list:
    """Read a line-parameter CSV into a list of :class:`LinePerUnit`."""
    out = []
    for lineno, (material, node, r, l, c) in _data_rows(path, LINE_HEADER):
        out.append(
            _validated(
                LinePerUnit,
                lineno,
                r=_float(r, lineno, "r_per_m"),
                l=_float(l, lineno, "l_per_m"),
                c=_float(c, lineno, "c_per_m"),
                material=material,
                node_label=node,
            )
        )
    return out


def load_geometry(path) -> list:
    out = []
    for lineno, (node, tier, w, t, s, h, eps) in _data_rows(path, GEOMETRY_HEADER):
        out.append(
            _validated(
                GeometrySpec,
                lineno,
                node=node,
                tier=tier,
                width=_float(w, lineno, "width_m"),
                thickness=_float(t, lineno, "thickness_m"),
                spacing=_float(s, lineno, "spacing_m"),
                height=_float(h, lineno, "height_m"),
                dielectric_const=_float(eps, lineno, "dielectric"),
            )
        )
    return out


def _write(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    if path is None:
        return buf.getvalue()
    Path(path).write_text(buf.getvalue())
    return None


def dump_line_params(records, path=None):
    """Write records in the line-parameter CSV schema.

    Returns the text when ``path`` is None.
    """
    rows = [
        (p.material, p.node_label, format_float(p.r), format_float(p.l), format_float(p.c)) for p in records
    ]
    return _write(path, LINE_HEADER, rows)


def dump_geometry(records, path=None):
    rows = [
        (
            g.node,
            g.tier,
            format_float(g.width),
            format_float(g.thickness),
            format_float(g.spacing),
            format_float(g.height),
            format_float(g.dielectric_const),
        )
        for g in records
    ]
    return _write(path, GEOMETRY_HEADER, rows)

"""Unit-suffixed quantity parsing.

Every dimensioned value entering the package from text carries an explicit
suffix (``2.5 kohm``, ``10 um``, ``12.9 nH/mm``).  Values are converted to
strict SI here and nowhere else.
"""

import math
import re
from decimal import Decimal

from .errors import ParseError

# decimal exponents, so "10 um" becomes exactly the double nearest 1e-5
PREFIXES = {"f": -15, "p": -12, "n": -9, "u": -6, "µ": -6, "μ": -6, "m": -3, "": 0, "k": 3, "M": 6, "G": 9, "T": 12}

# base symbol -> dimension tag
BASES = {
    "ohm": "ohm",
    "Ohm": "ohm",
    "Ω": "ohm",
    "H": "H",
    "F": "F",
    "m": "m",
    "s": "s",
    "V": "V",
    "J": "J",
}

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?inf)\s*(.*?)\s*$")


def _parse_unit(unit):
    """Return (power of ten, dimension) for a single unit token such as ``kohm``."""
    # Longest base first so "mm" is milli-metre and "ms" milli-second.
    for base in sorted(BASES, key=len, reverse=True):
        if unit.endswith(base):
            prefix = unit[: -len(base)]
            if prefix in PREFIXES:
                return PREFIXES[prefix], BASES[base]
    raise ValueError(f"unknown unit {unit!r}")


def unit_scale(unit):
    """Scale factor and dimension string for ``unit``, e.g. ``nH/mm``."""
    if "/" in unit:
        num, den = unit.split("/", 1)
        e_num, d_num = _parse_unit(num.strip())
        e_den, d_den = _parse_unit(den.strip())
        return 10.0 ** (e_num - e_den), f"{d_num}/{d_den}"
    exp, dim = _parse_unit(unit.strip())
    return 10.0**exp, dim


def _exponent(unit):
    if "/" in unit:
        num, den = unit.split("/", 1)
        return _parse_unit(num.strip())[0] - _parse_unit(den.strip())[0]
    return _parse_unit(unit.strip())[0]


def parse_quantity(text, dimension, line=None):
    """Parse ``"<number> <unit>"`` into an SI float.

    ``dimension`` is the expected dimension tag (``"ohm"``, ``"H/m"``, ...).
    A bare number is rejected for dimensioned quantities; pass
    ``dimension=None`` for dimensionless values.
    """
    m = _NUMBER.match(str(text))
    if not m:
        raise ParseError(f"cannot parse quantity {text!r}", line)
    value = float(m.group(1))
    unit = m.group(2)
    if dimension is None:
        if unit:
            raise ParseError(f"unexpected unit {unit!r} on dimensionless value", line)
        return value
    if not unit:
        raise ParseError(f"missing unit suffix on {text!r} (expected {dimension})", line)
    try:
        _, dim = unit_scale(unit)
    except ValueError as exc:
        raise ParseError(str(exc), line) from None
    if dim != dimension:
        raise ParseError(f"{text!r} has dimension {dim}, expected {dimension}", line)
    if math.isinf(value):
        return value
    return float(Decimal(m.group(1)).scaleb(_exponent(unit)))


def format_float(x):
    """Shortest round-trip decimal form of ``x``."""
    return repr(float(x))

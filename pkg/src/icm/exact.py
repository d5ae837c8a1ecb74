"""Exact s-domain transfer function of the terminated rc line."""

import math
from dataclasses import dataclass

import numpy as np

from .analytic import abc_coefficients
from .errors import PoleError, UnsupportedLoadError, ValidationError
from .params import Open, Resistive, Termination

POLE_RTOL = 1e-13


def hyperbolic_denominator(a, b, c, u):
    """(a/u + b*u) sinh(u) + c cosh(u), with the u -> 0 limit a + c.

    Works elementwise on numpy arrays of real or complex ``u``.
    """
    u = np.asarray(u)
    safe = np.where(u == 0, 1.0, u)
    with np.errstate(over="ignore", invalid="ignore"):
        sinhc = np.where(u == 0, 1.0, np.sinh(safe) / safe)
        out = (a + b * u * u) * sinhc + c * np.cosh(u)
    return out if out.ndim else out[()]


def exact_transfer(R1, C1, term: Termination, s) -> complex:
    """V(load)/V(in) at complex frequency ``s`` (rad/s)."""
    if not isinstance(term.load, (Resistive, Open)):
        raise UnsupportedLoadError("exact transfer is defined for resistive (or open) loads")
    abc = abc_coefficients(R1, C1, term)
    s = complex(s)
    u = np.sqrt(s * R1 * C1)
    den = complex(hyperbolic_denominator(abc.a, abc.b, abc.c, u))
    if not np.isfinite(den):
        # sinh/cosh overflowed: |H| is far below double precision
        return 0j
    scale = abs(abc.a) + abs(abc.b * u * u) + abc.c
    if abs(den) <= POLE_RTOL * scale * max(1.0, abs(np.cosh(u))):
        raise PoleError(f"transfer function evaluated at a pole (|denominator| = {abs(den):.3e})", abs(den))
    return 1.0 / den


@dataclass(frozen=True)
class TransferSample:
    s: complex
    H: complex

    @property
    def omega(self):
        return self.s.imag

    @property
    def magnitude(self):
        return abs(self.H)

    @property
    def phase(self):
        return math.atan2(self.H.imag, self.H.real)


def frequency_response(R1, C1, term, omegas):
    """Evaluate :func:`exact_transfer` along s = j*omega."""
    omegas = [float(w) for w in omegas]
    if any(w <= 0 for w in omegas):
        raise ValidationError("frequency grid must be positive", field="omega")
    if any(b <= a for a, b in zip(omegas, omegas[1:])):
        raise ValidationError("frequency grid must be strictly ascending", field="omega")
    return [TransferSample(1j * w, exact_transfer(R1, C1, term, 1j * w)) for w in omegas]


def bandwidth_3db(R1, C1, term, w_lo=None, w_hi=None):
    """Angular frequency where |H| falls 3 dB below its DC value.

    Bracketed by a log-spaced scan then refined by bisection on log(omega).
    """
    abc = abc_coefficients(R1, C1, term)
    dc = 1.0 / (abc.a + abc.c)
    target = dc / math.sqrt(2.0)
    rc = R1 * C1
    lo = w_lo if w_lo is not None else 1e-4 / rc
    hi = w_hi if w_hi is not None else 1e6 / rc

    def mag(w):
        return abs(exact_transfer(R1, C1, term, 1j * w))

    if mag(hi) > target:
        raise ValidationError("no -3 dB point below the search limit", field="omega")
    a, b = math.log(lo), math.log(hi)
    for _ in range(200):
        mid = 0.5 * (a + b)
        if mag(math.exp(mid)) > target:
            a = mid
        else:
            b = mid
        if b - a < 1e-13:
            break
    return math.exp(0.5 * (a + b))

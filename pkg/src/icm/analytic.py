"""Closed-form dominant-pole delay of a terminated distributed rc line.

The line (total resistance R1, capacitance C1) is driven through R_S and
terminated by a load.  Its transfer function is ``1/f(u)`` with
``u = sqrt(s*R1*C1)`` and

    f(u) = (a/u + b*u) sinh(u) + c cosh(u),
    a = R1/R_L,  b = R_S/R1,  c = 1 + R_S/R_L.

Expanding f in powers of u**2 (i.e. of s) and keeping the first two terms
gives a single-pole model whose time constant is the delay estimate.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedLoadError, ValidationError
from .params import LineTotals, Open, ResCap, Resistive, Short, Termination

MAX_SERIES_ORDER = 20

SHIELD_SOURCE = 0.65
SHIELD_IMPEDANCE = 0.36


def characteristic_impedance(totals: LineTotals) -> float:
    """sqrt(L_T / C_T); zero for an inductance-free line."""
    return math.sqrt(totals.L_T / totals.C_T)


def equivalent_resistance(R_S, Z0, R_T):
    """Effective driving-path resistance with inductance folded in."""
    for name, v in (("R_S", R_S), ("Z0", Z0), ("R_T", R_T)):
        if v < 0:
            raise ValidationError(f"{name} must be >= 0, got {v!r}", field=name)
    return SHIELD_SOURCE * R_S + SHIELD_IMPEDANCE * Z0 + R_T


@dataclass(frozen=True)
class AbcCoefficients:
    """Circuit constants a, b, c of the line transfer function.

    For a short-circuit load a and c diverge.  In that case ``short_limit``
    is set and (a, b, c) are stored multiplied by R_L/R1, which leaves every
    ratio of the form (...)/(a + c) unchanged and gives the finite limit
    a = 1, b = 0, c = R_S/R1.  ``dc_gain`` is then the load current gain in
    units of 1/R1 rather than a voltage gain.
    """

    a: float
    b: float
    c: float
    R1: float
    C1: float
    R_S: float
    R_L: float
    short_limit: bool = False

    @property
    def R1C1(self):
        return self.R1 * self.C1


def _load_kind(term):
    load = term.load
    if isinstance(load, ResCap):
        raise UnsupportedLoadError("closed-form model covers resistive, open and short loads only")
    return load


def abc_coefficients(R1, C1, term: Termination) -> AbcCoefficients:
    if not (R1 > 0) or not math.isfinite(R1):
        raise ValidationError(f"R1 must be positive, got {R1!r}", field="R1")
    if not (C1 > 0) or not math.isfinite(C1):
        raise ValidationError(f"C1 must be positive, got {C1!r}", field="C1")
    load = _load_kind(term)
    R_S = term.R_S
    b = R_S / R1
    if isinstance(load, Open):
        return AbcCoefficients(0.0, b, 1.0, R1, C1, R_S, math.inf)
    if isinstance(load, Short):
        return AbcCoefficients(1.0, 0.0, R_S / R1, R1, C1, R_S, 0.0, short_limit=True)
    R_L = load.R_L
    return AbcCoefficients(R1 / R_L, b, 1.0 + R_S / R_L, R1, C1, R_S, R_L)


@dataclass(frozen=True)
class SeriesExpansion:
    """Truncated expansion f(u) ~ sum_m coefficients[m] * u**(2m)."""

    coefficients: tuple
    order: int

    def __call__(self, u):
        """Evaluate the polynomial at ``u`` (scalar or array, real or complex)."""
        u2 = np.asarray(u) ** 2
        acc = np.zeros_like(u2) + self.coefficients[-1]
        for k in reversed(self.coefficients[:-1]):
            acc = acc * u2 + k
        return acc if acc.ndim else acc[()]

    def in_s(self, s, R1C1):
        """Evaluate as a polynomial in the Laplace variable (u**2 = s*R1*C1)."""
        return self(np.sqrt(np.asarray(s, dtype=complex) * R1C1))


def series_coefficients(abc: AbcCoefficients, order: int) -> SeriesExpansion:
    if not isinstance(order, (int, np.integer)) or order < 1:
        raise ValidationError(f"series order must be an integer >= 1, got {order!r}", field="order")
    if order > MAX_SERIES_ORDER:
        raise ValidationError(
            f"series order {order} exceeds {MAX_SERIES_ORDER}; higher terms are below double precision",
            field="order",
        )
    a, b, c = abc.a, abc.b, abc.c
    ks = [a + c]
    for m in range(1, order + 1):
        ks.append(
            b / math.factorial(2 * m - 1) + c / math.factorial(2 * m) + a / math.factorial(2 * m + 1)
        )
    return SeriesExpansion(tuple(ks), int(order))


@dataclass(frozen=True)
class FirstOrderModel:
    dc_gain: float
    a1: float
    tau_d: float

    @property
    def K1(self):
        return self.a1 * self.dc_gain


def first_order_model(abc: AbcCoefficients) -> FirstOrderModel:
    """Keep the constant and u**2 terms of the expansion: one real pole."""
    a, b, c = abc.a, abc.b, abc.c
    tau = (b + c / 2.0 + a / 6.0) / (a + c) * abc.R1C1
    return FirstOrderModel(dc_gain=1.0 / (a + c), a1=1.0 / tau, tau_d=tau)


MODE_LABELS = {Resistive: "general", Open: "voltage-mode-limit", Short: "current-mode-limit"}


@dataclass(frozen=True)
class DelayEstimate:
    tau_d: float
    t50: float
    t63: float
    mode_label: str
    inductance_aware: bool
    dc_gain: float = float("nan")


def closed_form_delay(R1, C1, term: Termination, inductance_aware=False, Z0=0.0) -> DelayEstimate:
    """Dominant-pole delay of the terminated line.

    With ``inductance_aware`` the line inductance is absorbed into resistance
    before the delay formula: R_S -> 0.65 R_S and R1 -> R1 + 0.36 Z0, so the
    driving-path sum matches :func:`equivalent_resistance`.
    """
    load = _load_kind(term)
    if inductance_aware:
        if Z0 < 0:
            raise ValidationError(f"Z0 must be >= 0, got {Z0!r}", field="Z0")
        term = Termination(SHIELD_SOURCE * term.R_S, load)
        R1 = R1 + SHIELD_IMPEDANCE * Z0
    model = first_order_model(abc_coefficients(R1, C1, term))
    tau = model.tau_d
    return DelayEstimate(
        tau_d=tau,
        t50=math.log(2.0) * tau,
        t63=tau,
        mode_label=MODE_LABELS[type(load)],
        inductance_aware=bool(inductance_aware),
        dc_gain=model.dc_gain,
    )


def line_delay(totals: LineTotals, term: Termination, inductance_aware=False) -> DelayEstimate:
    """:func:`closed_form_delay` for a line given by its totals."""
    return closed_form_delay(
        totals.R_T, totals.C_T, term, inductance_aware=inductance_aware, Z0=characteristic_impedance(totals)
    )


def step_response(model: FirstOrderModel, Vdd, t):
    """Load-end response of the single-pole model to a step of height Vdd."""
    t = np.asarray(t, dtype=float)
    v = Vdd * model.dc_gain * -np.expm1(-model.a1 * np.clip(t, 0.0, None))
    v = np.where(t < 0, 0.0, v)
    return v if v.ndim else float(v)

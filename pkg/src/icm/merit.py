"""Damping factor of the lumped RLC line model, energy per bit, throughput."""

import cmath
import math
from dataclasses import dataclass

from .errors import ValidationError
from .params import LineTotals

CRITICAL_TOL = 1e-9
CM_SWING_RATIO = 1.0 / math.sqrt(3.0)


@dataclass(frozen=True)
class DampingReport:
    xi: float
    omega0: float
    poles: tuple
    regime: str

    @property
    def rc_accurate(self):
        """Inductance is negligible for delay purposes."""
        return self.xi > 1.0


def damping_factor(totals: LineTotals) -> DampingReport:
    """Damping of a single series-RL, shunt-C section with the line totals.

    An inductance-free line is reported as overdamped with xi = inf; its
    finite pole is the RC pole -1/(R_T C_T), the L -> 0 limit of the slow
    root.
    """
    R, L, C = totals.R_T, totals.L_T, totals.C_T
    if L == 0:
        if R == 0:
            raise ValidationError("line with R_T = 0 and L_T = 0 has no dynamics", field="L_T")
        return DampingReport(math.inf, math.inf, (complex(-1.0 / (R * C)), complex(-math.inf)), "overdamped")
    w0 = 1.0 / math.sqrt(L * C)
    xi = 0.5 * R * math.sqrt(C / L)
    if abs(xi - 1.0) < CRITICAL_TOL:
        p = complex(-w0 * xi)
        return DampingReport(xi, w0, (p, p), "critical")
    if xi > 1.0:
        # slow root via the product identity to avoid cancellation at large xi
        fast = -w0 * (xi + math.sqrt(xi * xi - 1.0))
        slow = w0 * w0 / fast
        return DampingReport(xi, w0, (complex(slow), complex(fast)), "overdamped")
    root = cmath.sqrt(xi * xi - 1.0)
    return DampingReport(xi, w0, (w0 * (-xi + root), w0 * (-xi - root)), "underdamped")


def second_order_overshoot(xi):
    """Percent overshoot of a standard second-order step response."""
    if xi >= 1.0:
        return 0.0
    return 100.0 * math.exp(-math.pi * xi / math.sqrt(1.0 - xi * xi))


def inductive_time_constant(L_T, R_S, R_T):
    """L/R time constant of the source loop."""
    total = R_S + R_T
    if not total > 0:
        raise ValidationError("R_S + R_T must be positive", field="R_S")
    return L_T / total


def energy_per_bit(C_int, Vdd, swing_ratio=1.0):
    """0.5 * C_int * (swing_ratio * Vdd)**2 in joules."""
    if C_int < 0:
        raise ValidationError(f"C_int must be >= 0, got {C_int!r}", field="C_int")
    if Vdd < 0:
        raise ValidationError(f"Vdd must be >= 0, got {Vdd!r}", field="Vdd")
    if not (0.0 < swing_ratio <= 1.0):
        raise ValidationError(f"swing_ratio must lie in (0, 1], got {swing_ratio!r}", field="swing_ratio")
    v = swing_ratio * Vdd
    return 0.5 * C_int * v * v


@dataclass(frozen=True)
class EnergyReport:
    e_bit: float
    throughput: float
    tep: float
    swing_ratio: float = 1.0


def throughput_energy(delay, energy, swing_ratio=1.0, multiplier=1.0) -> EnergyReport:
    """Throughput (``multiplier`` bits per delay time constant) and its product with energy.

    ``delay`` may be a DelayEstimate or a bare time constant in seconds.
    """
    tau = getattr(delay, "tau_d", delay)
    if not tau > 0:
        raise ValidationError(f"delay must be positive, got {tau!r}", field="tau_d")
    if not multiplier > 0:
        raise ValidationError("throughput multiplier must be positive", field="multiplier")
    throughput = multiplier / tau
    return EnergyReport(e_bit=energy, throughput=throughput, tep=throughput * energy, swing_ratio=swing_ratio)

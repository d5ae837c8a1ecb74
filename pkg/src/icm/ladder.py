"""Transient simulation of a line as a ladder of gamma RLC sections.

Each of the N sections is a series (r dx, l dx) branch followed by a shunt
capacitor c dx.  The near end is driven by an ideal step of height Vdd
through R_S; the far end carries the termination.  The resulting linear
system is integrated with the trapezoidal rule.

State ordering interleaves branch currents and node voltages,
``[i_1, v_1, i_2, v_2, ..., i_N, v_N]``, which keeps the state matrix
tridiagonal.  When l = 0 the branch currents are algebraic and only the
node voltages remain.  A short-circuit load pins v_N to ground and removes
it from the state.
"""

import math
import threading
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analytic import closed_form_delay
from .errors import NotSettledError, NumericalInstabilityError, ValidationError
from .params import LinePerUnit, Open, ResCap, Resistive, Short, Termination, totals_from_per_unit

DEFAULT_SEGMENTS = 200
DEFAULT_STEPS = 10_000
SETTLE_RTOL = 1e-3
T63_LEVEL = 1.0 - math.exp(-1.0)
# |v_load| beyond this multiple of Vdd is treated as divergence
DIVERGENCE_FACTOR = 3.0

_counter_lock = threading.Lock()
_simulation_count = 0


def simulation_count():
    """Number of :func:`simulate` calls made in this process."""
    return _simulation_count


@dataclass(frozen=True)
class LadderConfig:
    per_unit: LinePerUnit
    d: float
    term: Termination
    n_segments: int = DEFAULT_SEGMENTS
    Vdd: float = 1.0
    t_end: Optional[float] = None
    dt: Optional[float] = None
    be_steps: int = 0

    def __post_init__(self):
        if not (self.d > 0):
            raise ValidationError(f"length must be > 0, got {self.d!r}", field="d")
        if int(self.n_segments) != self.n_segments or self.n_segments < 1:
            raise ValidationError(f"n_segments must be an integer >= 1, got {self.n_segments!r}", field="n_segments")
        if not math.isfinite(self.Vdd):
            raise ValidationError("Vdd must be finite", field="Vdd")
        if self.t_end is not None and not self.t_end > 0:
            raise ValidationError(f"t_end must be > 0, got {self.t_end!r}", field="t_end")
        if self.dt is not None:
            if not self.dt > 0:
                raise ValidationError(f"dt must be > 0, got {self.dt!r}", field="dt")
            if self.t_end is not None and self.dt > self.t_end / 100 * (1 + 1e-12):
                raise ValidationError("dt must be <= t_end/100", field="dt")

    @property
    def totals(self):
        return totals_from_per_unit(self.per_unit, self.d)

    def dc_value(self):
        """Final value of the observed signal (v_load, or i_load for a short)."""
        t = self.totals
        R = self.term.R_S + t.R_T
        if self.term.is_short:
            return self.Vdd / R
        g = self.term.load_conductance
        if g == 0:
            return self.Vdd
        R_L = 1.0 / g
        return self.Vdd * R_L / (R + R_L)

    def default_t_end(self):
        """20 time constants of the slowest expected mode.

        The rc estimate uses the closed-form delay (with the load capacitor
        folded in as an extra RC); the inductive estimate is the lumped
        envelope decay time 2 L_T / (R_S + R_T).
        """
        t = self.totals
        term = self.term
        R_S = term.R_S
        load = term.load
        extra = 0.0
        if isinstance(load, ResCap):
            if load.R_L == 0:
                load = Short()
            elif math.isinf(load.R_L):
                extra = (R_S + t.R_T) * load.C_L
                load = Open()
            else:
                extra = min(load.R_L, R_S + t.R_T) * load.C_L
                load = Resistive(load.R_L)
        if t.R_T > 0:
            tau = closed_form_delay(t.R_T, t.C_T, Termination(R_S, load)).tau_d + extra
        else:
            tau = R_S * t.C_T + extra
        flight = math.sqrt(t.L_T * t.C_T)
        if t.L_T > 0:
            loss = R_S + t.R_T
            ring = 2.0 * t.L_T / loss if loss > 0 else 100.0 * flight
            tau = max(tau, ring, flight)
        if not tau > 0:
            raise ValidationError("cannot infer a time scale; pass t_end explicitly", field="t_end")
        return 20.0 * tau


@dataclass(frozen=True)
class LadderSystem:
    """x' = A x + b u with tridiagonal A; outputs y = C x + D u.

    Output rows are (v_load, i_load, i_source).
    """

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    b: np.ndarray
    c_out: np.ndarray
    d_out: np.ndarray
    labels: tuple

    @property
    def n_states(self):
        return self.diag.size

    def dense(self):
        """Return (A, B, C, D) as dense arrays."""
        n = self.n_states
        A = np.diag(self.diag)
        if n > 1:
            A = A + np.diag(self.lower, -1) + np.diag(self.upper, 1)
        return A, self.b.reshape(n, 1), self.c_out, self.d_out.reshape(-1, 1)


def build_ladder(cfg: LadderConfig) -> LadderSystem:
    p, N = cfg.per_unit, int(cfg.n_segments)
    dx = cfg.d / N
    term = cfg.term
    short = term.is_short
    gl = 0.0 if short else term.load_conductance
    Rb = np.full(N, p.r * dx)
    Rb[0] += term.R_S
    Cn = np.full(N, p.c * dx)
    Cn[-1] += term.load_capacitance
    Lb = p.l * dx

    if Lb == 0 and p.r == 0:
        if N > 1:
            # ideal wire: the sections merge into one node carrying C_T
            merged = LinePerUnit(0.0, 0.0, p.c, p.material, p.node_label)
            return build_ladder(LadderConfig(merged, cfg.d, term, 1, cfg.Vdd, cfg.t_end, cfg.dt, cfg.be_steps))
        if term.R_S == 0:
            raise ValidationError("no resistance or inductance between source and load", field="R_S")

    if Lb > 0:
        return _build_rlc(N, Rb, Lb, Cn, gl, short)
    return _build_rc(N, Rb, Cn, gl, short)


def _build_rlc(N, Rb, Lb, Cn, gl, short):
    n = 2 * N - (1 if short else 0)
    diag = np.zeros(n)
    lower = np.zeros(max(n - 1, 0))
    upper = np.zeros(max(n - 1, 0))
    b = np.zeros(n)
    labels = []
    for k in range(N):
        ii = 2 * k  # i_{k+1}
        labels.append(f"i{k + 1}")
        diag[ii] = -Rb[k] / Lb
        if k == 0:
            b[ii] = 1.0 / Lb
        else:
            lower[ii - 1] = 1.0 / Lb  # from v_k
        if ii + 1 < n:
            upper[ii] = -1.0 / Lb  # from v_{k+1}
            iv = ii + 1
            labels.append(f"v{k + 1}")
            lower[iv - 1] = 1.0 / Cn[k]  # from i_{k+1}
            if iv + 1 < n:
                upper[iv] = -1.0 / Cn[k]  # to i_{k+2}
            if k == N - 1:
                diag[iv] = -gl / Cn[k]
    c_out = np.zeros((3, n))
    d_out = np.zeros(3)
    c_out[2, 0] = 1.0
    if short:
        c_out[1, n - 1] = 1.0
    else:
        c_out[0, n - 1] = 1.0
        c_out[1, n - 1] = gl
    return LadderSystem(lower, diag, upper, b, c_out, d_out, tuple(labels))


def _build_rc(N, Rb, Cn, gl, short):
    G = 1.0 / Rb
    n = N - (1 if short else 0)
    diag = np.zeros(n)
    lower = np.zeros(max(n - 1, 0))
    upper = np.zeros(max(n - 1, 0))
    b = np.zeros(n)
    for k in range(n):
        g_in = G[k]
        g_out = G[k + 1] if k + 1 < N else gl
        diag[k] = -(g_in + g_out) / Cn[k]
        if k > 0:
            lower[k - 1] = G[k] / Cn[k]
        if k + 1 < n:
            upper[k] = G[k + 1] / Cn[k]
    if n:
        b[0] = G[0] / Cn[0]
    c_out = np.zeros((3, n))
    d_out = np.zeros(3)
    # source current G_1 (u - v_1)
    d_out[2] = G[0]
    if n:
        c_out[2, 0] = -G[0]
    if short:
        # current into the grounded far end through the last branch
        if n:
            c_out[1, n - 1] = G[N - 1]
        else:
            d_out[1] = G[0]
    else:
        c_out[0, n - 1] = 1.0
        c_out[1, n - 1] = gl
    return LadderSystem(lower, diag, upper, b, c_out, d_out, tuple(f"v{k + 1}" for k in range(n)))


@dataclass(frozen=True)
class SimTrace:
    times: np.ndarray
    v_load: np.ndarray
    i_source: np.ndarray
    i_load: np.ndarray
    meta: Optional[LadderConfig] = None
    observed: str = "v_load"

    @property
    def signal(self):
        """The waveform delay is measured on: load current for a short, else load voltage."""
        return self.i_load if self.observed == "i_load" else self.v_load

    @property
    def settled(self):
        if self.meta is None:
            return True
        final = self.meta.dc_value()
        return abs(self.signal[-1] - final) <= SETTLE_RTOL * abs(final)


def simulate(cfg: LadderConfig, backend=None) -> SimTrace:
    """Step response of the ladder.

    ``backend`` forces ``"numba"`` or ``"numpy"``; by default the kernel
    selected at import time is used.
    """
    global _simulation_count
    with _counter_lock:
        _simulation_count += 1
    t_end = cfg.t_end if cfg.t_end is not None else cfg.default_t_end()
    dt = cfg.dt if cfg.dt is not None else t_end / DEFAULT_STEPS
    if dt > t_end / 100 * (1 + 1e-12):
        raise ValidationError("dt must be <= t_end/100", field="dt")
    n_steps = int(math.ceil(t_end / dt - 1e-9))
    from . import _kernels  # deferred: importing numba is slow

    sys = build_ladder(cfg)
    fn = {
        None: _kernels.integrate,
        "numba": _kernels.integrate_numba,
        "numpy": _kernels.integrate_numpy,
    }[backend]
    y = fn(sys.lower, sys.diag, sys.upper, sys.b, sys.c_out, sys.d_out, cfg.Vdd, dt, n_steps, cfg.be_steps)
    times = dt * np.arange(n_steps + 1)
    v_load = y[:, 0]
    bad = ~np.isfinite(y).all(axis=1) | (np.abs(v_load) > DIVERGENCE_FACTOR * abs(cfg.Vdd))
    if bad.any():
        t_bad = times[np.argmax(bad)]
        raise NumericalInstabilityError(f"integration diverged at t = {t_bad:.6g} s", t_bad)
    return SimTrace(
        times=times,
        v_load=v_load,
        i_source=y[:, 2],
        i_load=y[:, 1],
        meta=cfg,
        observed="i_load" if cfg.term.is_short else "v_load",
    )


@dataclass(frozen=True)
class StepMetrics:
    t50: float
    t63: float
    overshoot_pct: float
    final_value: float
    settled: bool


def _crossing(t, v, level):
    above = np.nonzero(v >= level)[0]
    if above.size == 0:
        return None
    i = above[0]
    if i == 0:
        return float(t[0])
    v0, v1 = v[i - 1], v[i]
    return float(t[i - 1] + (level - v0) * (t[i] - t[i - 1]) / (v1 - v0))


def extract_metrics(trace: SimTrace) -> StepMetrics:
    """50 % and 63.2 % crossing times and overshoot of the observed signal.

    The reference level is the circuit's DC value when the trace carries its
    config, otherwise the last sample.
    """
    v = np.asarray(trace.signal, dtype=float)
    t = np.asarray(trace.times, dtype=float)
    if v.size == 0:
        raise NotSettledError("empty trace")
    final = trace.meta.dc_value() if trace.meta is not None else float(v[-1])
    if final == 0 or not math.isfinite(final):
        raise NotSettledError("trace has no step to measure (final value is zero)")
    sign = 1.0 if final > 0 else -1.0
    vn = sign * v / abs(final)
    t50 = _crossing(t, vn, 0.5)
    t63 = _crossing(t, vn, T63_LEVEL)
    if t50 is None or t63 is None:
        raise NotSettledError("response never crossed the 50 %/63 % thresholds")
    overshoot = max(0.0, (vn.max() - 1.0) * 100.0)
    settled = abs(vn[-1] - 1.0) <= SETTLE_RTOL
    return StepMetrics(t50=t50, t63=t63, overshoot_pct=overshoot, final_value=final, settled=bool(settled))

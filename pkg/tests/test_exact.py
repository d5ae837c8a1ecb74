import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from icm.analytic import abc_coefficients, first_order_model
from icm.errors import PoleError, UnsupportedLoadError, ValidationError
from icm.exact import bandwidth_3db, exact_transfer, frequency_response, hyperbolic_denominator
from icm.params import Open, ResCap, Resistive, Short, Termination


def test_denominator_zero_limit():
    assert hyperbolic_denominator(2.0, 0.1, 1.2, 0.0) == pytest.approx(3.2)
    arr = hyperbolic_denominator(2.0, 0.1, 1.2, np.array([0.0, 0.5]))
    assert arr.shape == (2,)


def test_denominator_complex_argument():
    u = cmath.sqrt(1j)
    got = hyperbolic_denominator(1.0, 0.5, 2.0, u)
    want = (1.0 / u + 0.5 * u) * cmath.sinh(u) + 2.0 * cmath.cosh(u)
    assert abs(got - want) < 1e-14


@given(
    R1=st.floats(1.0, 1e6),
    C1=st.floats(1e-15, 1e-9),
    R_S=st.floats(0.0, 1e5),
    R_L=st.floats(1e-2, 1e8),
)
def test_dc_gain_is_divider(R1, C1, R_S, R_L):
    h = exact_transfer(R1, C1, Termination(R_S, Resistive(R_L)), 0.0)
    assert h.imag == 0.0
    assert h.real == pytest.approx(R_L / (R1 + R_L + R_S), rel=1e-12)


def test_open_dc_gain_is_one():
    assert exact_transfer(1e3, 1e-12, Termination(50.0, Open()), 0) == pytest.approx(1.0)


def test_open_unloaded_line_is_sech():
    s = 2j / 1e-9
    h = exact_transfer(1e3, 1e-12, Termination(0.0, Open()), s)
    assert h == pytest.approx(1.0 / cmath.cosh(cmath.sqrt(s * 1e-9)), rel=1e-13)


def test_unsupported_loads():
    with pytest.raises(UnsupportedLoadError):
        exact_transfer(1.0, 1.0, Termination(0.0, Short()), 1j)
    with pytest.raises(UnsupportedLoadError):
        exact_transfer(1.0, 1.0, Termination(0.0, ResCap(1.0, 1.0)), 1j)


def test_pole_detected():
    # open, R_S = 0: poles where cosh(u) = 0, u = j*pi/2, s = -(pi/2)**2 / R1C1
    s = -((math.pi / 2) ** 2)
    with pytest.raises(PoleError) as exc:
        exact_transfer(1.0, 1.0, Termination(0.0, Open()), s)
    assert exc.value.magnitude < 1e-13


def test_high_frequency_underflows_to_zero():
    assert exact_transfer(1.0, 1.0, Termination(0.0, Open()), 1e8j) == 0j


class TestFrequencyResponse:
    def test_samples(self):
        ws = [1e6, 1e8, 1e10]
        out = frequency_response(1e3, 1e-12, Termination(0.0, Resistive(1e3)), ws)
        assert [x.omega for x in out] == ws
        assert out[0].magnitude == pytest.approx(0.5, rel=1e-6)
        assert out[0].magnitude > out[1].magnitude > out[2].magnitude
        assert -math.pi < out[2].phase < 0

    def test_empty_grid(self):
        assert frequency_response(1.0, 1.0, Termination(0.0, Open()), []) == []

    @pytest.mark.parametrize("grid", [[0.0, 1.0], [-1.0], [2.0, 1.0], [1.0, 1.0]])
    def test_bad_grid(self, grid):
        with pytest.raises(ValidationError):
            frequency_response(1.0, 1.0, Termination(0.0, Open()), grid)


class TestBandwidth:
    """-3 dB frequency against the dominant pole 1/tau_d.

    Ratios were frozen from an independent high-precision root solve of
    |H(j w)| = |H(0)|/sqrt(2).
    """

    def test_open_unloaded_frozen(self):
        bw = bandwidth_3db(1.0, 1.0, Termination(0.0, Open()))
        assert bw == pytest.approx(2.43238, rel=1e-5)
        a1 = first_order_model(abc_coefficients(1.0, 1.0, Termination(0.0, Open()))).a1
        assert bw / a1 == pytest.approx(1.2162, rel=1e-4)

    def test_near_short_frozen(self):
        term = Termination(0.0, Resistive(1e-6))
        bw = bandwidth_3db(1.0, 1.0, term)
        a1 = first_order_model(abc_coefficients(1.0, 1.0, term)).a1
        assert bw / a1 == pytest.approx(1.530, rel=2e-3)

    @pytest.mark.parametrize(
        "R_S, load",
        [(0.0, Open()), (500.0, Open()), (2000.0, Resistive(1e5)), (1e4, Resistive(1e4))],
    )
    def test_within_25pct_for_voltage_mode_loads(self, R_S, load):
        term = Termination(R_S, load)
        bw = bandwidth_3db(1e3, 1e-12, term)
        a1 = first_order_model(abc_coefficients(1e3, 1e-12, term)).a1
        assert abs(bw / a1 - 1.0) < 0.25

    def test_magnitude_at_bandwidth(self):
        term = Termination(100.0, Resistive(500.0))
        bw = bandwidth_3db(1e3, 1e-12, term)
        h0 = exact_transfer(1e3, 1e-12, term, 0)
        assert abs(exact_transfer(1e3, 1e-12, term, 1j * bw)) == pytest.approx(abs(h0) / math.sqrt(2), rel=1e-9)

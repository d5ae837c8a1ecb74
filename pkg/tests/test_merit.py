import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from icm.errors import ValidationError
from icm.merit import (
    CM_SWING_RATIO,
    damping_factor,
    energy_per_bit,
    inductive_time_constant,
    second_order_overshoot,
    throughput_energy,
)
from icm.params import LineTotals

pos = st.floats(min_value=1e-3, max_value=1e3)


def totals(R, L, C):
    return LineTotals(R_T=R, L_T=L, C_T=C, d=1e-3)


class TestDamping:
    def test_reference_value(self):
        rep = damping_factor(totals(220.0, 19.37e-9, 2e-12))
        assert rep.xi == pytest.approx(110.0 * math.sqrt(2e-12 / 19.37e-9))
        assert rep.omega0 == pytest.approx(1 / math.sqrt(19.37e-9 * 2e-12))

    def test_regimes(self):
        assert damping_factor(totals(1.0, 1.0, 1.0)).regime == "underdamped"
        assert damping_factor(totals(2.0, 1.0, 1.0)).regime == "critical"
        assert damping_factor(totals(3.0, 1.0, 1.0)).regime == "overdamped"
        assert not damping_factor(totals(1.0, 1.0, 1.0)).rc_accurate
        assert damping_factor(totals(3.0, 1.0, 1.0)).rc_accurate

    def test_critical_double_pole(self):
        rep = damping_factor(totals(2.0, 1.0, 1.0))
        assert rep.poles[0] == rep.poles[1] == complex(-1.0)

    def test_no_inductance(self):
        rep = damping_factor(totals(10.0, 0.0, 1e-12))
        assert rep.xi == math.inf and rep.regime == "overdamped"
        assert rep.poles[0] == pytest.approx(-1e11)

    def test_no_dynamics(self):
        with pytest.raises(ValidationError):
            damping_factor(totals(0.0, 0.0, 1.0))

    def test_lossless(self):
        rep = damping_factor(totals(0.0, 1.0, 1.0))
        assert rep.xi == 0.0
        assert rep.poles[0] == pytest.approx(1j)

    @given(R=pos, L=pos, C=pos)
    def test_pole_identities(self, R, L, C):
        rep = damping_factor(totals(R, L, C))
        p1, p2 = rep.poles
        w0 = rep.omega0
        # product = w0**2, sum = -2 xi w0 (equivalently -R/L)
        assert abs(p1 * p2 - w0 * w0) <= 1e-9 * w0 * w0
        assert abs((p1 + p2) + 2 * rep.xi * w0) <= 1e-9 * (abs(p1) + abs(p2))
        assert p1.real < 0 and p2.real < 0

    def test_large_xi_slow_pole_is_rc_pole(self):
        rep = damping_factor(totals(1e6, 1e-15, 1e-12))
        assert rep.poles[0].real == pytest.approx(-1 / (1e6 * 1e-12), rel=1e-6)


@pytest.mark.parametrize("xi, expected", [(0.3, 37.23), (0.5, 16.30), (0.7, 4.60), (1.0, 0.0), (3.0, 0.0)])
def test_overshoot_formula(xi, expected):
    assert second_order_overshoot(xi) == pytest.approx(expected, abs=0.01)


class TestInductiveTimeConstant:
    def test_reference(self):
        assert inductive_time_constant(19.37e-9, 2.5e3, 220.0) == pytest.approx(7.12e-12, rel=1e-3)

    def test_cnt(self):
        assert inductive_time_constant(129.129e-9, 2.5e3, 220.0) == pytest.approx(47.47e-12, rel=1e-3)

    def test_zero_resistance(self):
        with pytest.raises(ValidationError):
            inductive_time_constant(1e-9, 0.0, 0.0)


class TestEnergy:
    def test_voltage_mode(self):
        assert energy_per_bit(90e-15, 1.0) == pytest.approx(0.045e-12, rel=1e-12)

    def test_current_mode(self):
        assert energy_per_bit(90e-15, 1.0, CM_SWING_RATIO) == pytest.approx(0.015e-12, rel=1e-12)

    @given(C=st.floats(0, 1e-9), V=st.floats(0, 10), k=st.floats(0.01, 100), s=st.floats(0.01, 1.0))
    def test_quadratic_in_vdd_linear_in_c(self, C, V, k, s):
        e = energy_per_bit(C, V, s)
        assert energy_per_bit(C, k * V, s) == pytest.approx(k * k * e, rel=1e-12, abs=1e-300)
        assert energy_per_bit(k * C, V, s) == pytest.approx(k * e, rel=1e-12, abs=1e-300)

    @pytest.mark.parametrize("kw", [dict(C_int=-1.0), dict(Vdd=-1.0), dict(swing_ratio=0.0), dict(swing_ratio=1.5)])
    def test_invalid(self, kw):
        args = dict(C_int=1e-15, Vdd=1.0, swing_ratio=1.0)
        args.update(kw)
        with pytest.raises(ValidationError):
            energy_per_bit(**args)

    def test_reference_power(self):
        rep = throughput_energy(1e-9, 0.045e-12)
        assert rep.throughput == pytest.approx(1e9)
        assert rep.tep == pytest.approx(45e-6)

    def test_throughput(self):
        rep = throughput_energy(1e-10, 1e-13)
        assert rep.throughput == pytest.approx(1e10)
        assert rep.tep == pytest.approx(1e-3)
        assert throughput_energy(1e-10, 1e-13, multiplier=2).throughput == pytest.approx(2e10)
        with pytest.raises(ValidationError):
            throughput_energy(0.0, 1.0)

    def test_cm_vs_vm_tep(self):
        # equal R1C1, R_S = 0: delay ratio 1/3, energy ratio 1/3 at the CM swing
        vm = throughput_energy(0.5, energy_per_bit(1.0, 1.0))
        cm = throughput_energy(0.5 / 3, energy_per_bit(1.0, 1.0, CM_SWING_RATIO))
        # tep = throughput * energy: 3x throughput cancels 1/3 energy
        assert cm.tep / vm.tep == pytest.approx(1.0)
        # the 1/9 figure is the energy-delay product (energy per unit throughput)
        assert (cm.e_bit / cm.throughput) / (vm.e_bit / vm.throughput) == pytest.approx(1 / 9)
        same_swing = throughput_energy(0.5 / 3, energy_per_bit(1.0, 1.0))
        assert (same_swing.e_bit / same_swing.throughput) / (vm.e_bit / vm.throughput) == pytest.approx(1 / 3)


@given(xi=st.floats(0.1, 100.0), w0=st.floats(1e6, 1e12))
def test_pole_identities_tight(xi, w0):
    # choose L = 1 nH, then C and R from w0 and xi
    L = 1e-9
    C = 1.0 / (w0 * w0 * L)
    R = 2.0 * xi * math.sqrt(L / C)
    rep = damping_factor(totals(R, L, C))
    p1, p2 = rep.poles
    assert abs(p1 * p2 - rep.omega0**2) <= 1e-10 * rep.omega0**2
    assert abs(p1 + p2 + 2 * rep.xi * rep.omega0) <= 1e-10 * 2 * rep.xi * rep.omega0


def test_quadratic_energy_exact_doubling():
    assert energy_per_bit(90e-15, 2.0) == 4 * energy_per_bit(90e-15, 1.0)
    assert energy_per_bit(0.0, 1.0) == 0.0

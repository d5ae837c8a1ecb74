import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from icm.errors import ParseError, ValidationError
from icm.params import (
    GeometrySpec,
    LinePerUnit,
    LineTotals,
    Open,
    ResCap,
    Resistive,
    Short,
    Termination,
    dump_geometry,
    dump_line_params,
    load_geometry,
    load_line_params,
    totals_from_per_unit,
)

pos = st.floats(min_value=1e-6, max_value=1e9, allow_nan=False, allow_infinity=False)
nonneg = st.one_of(st.just(0.0), pos)


class TestTotals:
    def test_identity_scaling(self):
        t = totals_from_per_unit(LinePerUnit(0.0, 0.0, 1e-10), 1.0)
        assert (t.R_T, t.L_T, t.C_T) == (0.0, 0.0, 1e-10)

    def test_line_resistance_10mm(self):
        t = totals_from_per_unit(LinePerUnit(22e3, 0.0, 1e-10), 0.01)
        assert t.R_T == pytest.approx(220.0, rel=1e-15)

    def test_cnt_inductance_10mm(self):
        t = totals_from_per_unit(LinePerUnit(1000.0, 1.29129e-5, 1e-10), 0.01)
        assert t.L_T == pytest.approx(129.129e-9, rel=1e-14)

    @pytest.mark.parametrize("d", [0.0, -1.0, math.nan, math.inf])
    def test_bad_length(self, d):
        with pytest.raises(ValidationError):
            totals_from_per_unit(LinePerUnit(1.0, 0.0, 1.0), d)

    @given(r=nonneg, l=nonneg, c=pos, d=st.floats(min_value=1e-9, max_value=1.0))
    def test_linear_in_length(self, r, l, c, d):
        p = LinePerUnit(r, l, c)
        one, two = totals_from_per_unit(p, d), totals_from_per_unit(p, 2 * d)
        # doubling is exact in binary floating point
        assert (two.R_T, two.L_T, two.C_T) == (2 * one.R_T, 2 * one.L_T, 2 * one.C_T)

    def test_per_unit_inverse(self):
        t = LineTotals(220.0, 19.37e-9, 2e-12, 0.01)
        p = t.per_unit()
        assert p.r == pytest.approx(22e3) and p.l == pytest.approx(1.937e-6)


class TestTypes:
    @pytest.mark.parametrize(
        "kwargs, field",
        [
            (dict(r=-1.0, l=0.0, c=1.0), "r"),
            (dict(r=0.0, l=-1.0, c=1.0), "l"),
            (dict(r=0.0, l=0.0, c=0.0), "c"),
            (dict(r=math.nan, l=0.0, c=1.0), "r"),
        ],
    )
    def test_line_invariants(self, kwargs, field):
        with pytest.raises(ValidationError) as exc:
            LinePerUnit(**kwargs)
        assert exc.value.field == field

    def test_terminations(self):
        assert Termination(10.0, Short()).is_short
        assert Termination(10.0, ResCap(0.0, 1e-15)).is_short
        assert Termination(10.0, Open()).load_conductance == 0.0
        assert Termination(10.0, Resistive(500.0)).load_conductance == pytest.approx(1 / 500)
        assert Termination(0.0, ResCap(math.inf, 1e-15)).load_capacitance == 1e-15
        with pytest.raises(ValidationError):
            Termination(-1.0, Open())
        with pytest.raises(ValidationError):
            Resistive(0.0)
        with pytest.raises(ValidationError):
            ResCap(10.0, -1e-15)

    def test_geometry_invariants(self):
        with pytest.raises(ValidationError) as exc:
            GeometrySpec("45nm", "local", 1e-8, 1e-8, 1e-8, 1e-8, 0.5)
        assert exc.value.field == "dielectric_const"
        with pytest.raises(ValidationError):
            GeometrySpec("45nm", "semi", 1e-8, 1e-8, 1e-8, 1e-8, 2.0)


class TestLineCsv:
    def test_header_only(self, tmp_path):
        f = tmp_path / "l.csv"
        f.write_text("material,node,r_per_m,l_per_m,c_per_m\n")
        assert load_line_params(f) == []

    def test_row(self, tmp_path):
        f = tmp_path / "l.csv"
        f.write_text("# extracted values\nmaterial,node,r_per_m,l_per_m,c_per_m\nCNT,45nm,1000,1.29129e-5,1e-10\n")
        (p,) = load_line_params(f)
        assert p == LinePerUnit(1000.0, 1.29129e-5, 1e-10, "CNT", "45nm")

    def test_round_trip(self, tmp_path):
        recs = [LinePerUnit(1000.0, 1.29129e-5, 1e-10, "CNT", "45nm"), LinePerUnit(0.0, 0.0, 3e-11, "Cu", "")]
        f = tmp_path / "l.csv"
        dump_line_params(recs, f)
        assert load_line_params(f) == recs
        assert dump_line_params(load_line_params(f)) == f.read_text()

    def test_negative_capacitance_names_field(self, tmp_path):
        f = tmp_path / "l.csv"
        f.write_text("material,node,r_per_m,l_per_m,c_per_m\nCNT,45nm,1000,0,-1e-12\n")
        with pytest.raises(ValidationError) as exc:
            load_line_params(f)
        assert exc.value.field == "c"
        assert "line 2" in str(exc.value)

    def test_malformed_row_names_line(self, tmp_path):
        f = tmp_path / "l.csv"
        f.write_text("material,node,r_per_m,l_per_m,c_per_m\nCNT,45nm,1000,0,1e-10\nCNT,45nm,abc,0,1e-10\n")
        with pytest.raises(ParseError) as exc:
            load_line_params(f)
        assert exc.value.line == 3

    def test_wrong_field_count(self, tmp_path):
        f = tmp_path / "l.csv"
        f.write_text("material,node,r_per_m,l_per_m,c_per_m\nCNT,45nm,1000,0\n")
        with pytest.raises(ParseError):
            load_line_params(f)

    def test_bad_header(self, tmp_path):
        f = tmp_path / "l.csv"
        f.write_text("material,r,l,c\n")
        with pytest.raises(ParseError):
            load_line_params(f)

    @given(
        st.lists(
            st.tuples(st.sampled_from(["Al", "Cu", "CNT"]), nonneg, nonneg, pos),
            max_size=5,
        )
    )
    def test_round_trip_property(self, items):
        recs = [LinePerUnit(r, l, c, m, "45nm") for m, r, l, c in items]
        import tempfile
        from pathlib import Path

        with tempfile.TemporaryDirectory() as d:
            f = Path(d) / "x.csv"
            dump_line_params(recs, f)
            assert load_line_params(f) == recs


class TestGeometry:
    def test_reference_table(self, data_dir):
        rows = load_geometry(data_dir / "table1_45nm.csv")
        assert [g.tier for g in rows] == ["local", "intermediate", "global"]
        local, inter, glob = rows
        assert (local.width, local.thickness, local.spacing, local.height) == pytest.approx(
            (68e-9, 136e-9, 68e-9, 136e-9), rel=1e-15
        )
        assert local.dielectric_const == 2.1
        assert (inter.width, inter.thickness) == pytest.approx((95e-9, 240e-9), rel=1e-15)
        assert (glob.width, glob.thickness) == pytest.approx((310e-9, 820e-9), rel=1e-15)
        assert all(g.height == pytest.approx(136e-9) for g in rows)

    def test_reference_file_round_trips(self, data_dir):
        path = data_dir / "table1_45nm.csv"
        assert dump_geometry(load_geometry(path)) == path.read_text()

    def test_low_dielectric_rejected(self, tmp_path):
        f = tmp_path / "g.csv"
        f.write_text(
            "node,tier,width_m,thickness_m,spacing_m,height_m,dielectric\n45nm,local,6.8e-8,1.36e-7,6.8e-8,1.36e-7,0.5\n"
        )
        with pytest.raises(ValidationError) as exc:
            load_geometry(f)
        assert exc.value.field == "dielectric_const"

    def test_packaged_copy_matches(self, data_dir):
        from importlib import resources

        for name in ("table1_45nm.csv", "table4_cnt_45nm.csv"):
            packaged = resources.files("icm").joinpath("data", name).read_text()
            assert packaged == (data_dir / name).read_text()

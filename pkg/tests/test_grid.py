import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracks.grid import (
    Field,
    NonFiniteFieldError,
    Spectrum,
    SpectrumSymmetryError,
    TorusGrid,
    extrema,
    field_from_csv,
    field_from_json,
    field_to_csv,
    field_to_json,
    from_spectrum,
    mean,
    to_spectrum,
)

from conftest import random_field


class TestTorusGrid:
    def test_spacing_times_n_is_two_pi(self):
        for n in (8, 64, 250):
            g = TorusGrid(n)
            assert g.dx * g.n == pytest.approx(2 * math.pi, rel=1e-15)

    def test_origin_at_minus_pi(self):
        g = TorusGrid(16)
        assert g.x[0] == pytest.approx(-math.pi)
        assert g.x[8] == pytest.approx(0.0, abs=1e-15)

    def test_wavenumber_layout(self):
        g = TorusGrid(8)
        assert list(g.wavenumbers) == [0, 1, 2, 3, 4, -3, -2, -1]

    @pytest.mark.parametrize("bad", [7, 6, 0, -8, 9])
    def test_rejects_small_or_odd(self, bad):
        with pytest.raises(ValueError):
            TorusGrid(bad)


class TestFieldConstruction:
    def test_length_mismatch(self, grid64):
        with pytest.raises(ValueError):
            Field(grid64, np.zeros(63))

    def test_values_are_frozen(self, grid64):
        f = Field(grid64, np.zeros(64))
        with pytest.raises(ValueError):
            f.values[0] = 1.0

    def test_nonfinite_is_storable_but_flagged(self, grid64):
        vals = np.ones(64)
        vals[5] = np.inf
        f = Field(grid64, vals)
        assert not f.is_finite
        with pytest.raises(NonFiniteFieldError) as exc:
            f.require_finite()
        assert exc.value.index == 5


class TestTransforms:
    def test_constant_field_only_k0(self, grid64):
        s = to_spectrum(Field(grid64, np.full(64, 3.0)))
        coeffs = s.coefficients
        assert coeffs[0] == pytest.approx(3.0 * 64)
        assert np.max(np.abs(coeffs[1:])) < 1e-12 * 64

    def test_pure_mode(self, grid64):
        s = to_spectrum(Field(grid64, np.cos(3 * grid64.x)))
        mags = np.abs(s.coefficients)
        hot = np.flatnonzero(mags > 1e-9 * 64)
        assert sorted(grid64.wavenumbers[hot].tolist()) == [-3, 3]

    def test_mean_is_k0_over_n(self, grid128):
        f = random_field(grid128, seed=1)
        s = to_spectrum(f)
        assert s.coefficients[0].real / grid128.n == pytest.approx(mean(f), abs=1e-13)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_round_trip(self, seed):
        g = TorusGrid(64)
        f = random_field(g, seed)
        back = from_spectrum(to_spectrum(f))
        scale = max(np.max(np.abs(f.values)), 1e-30)
        assert np.max(np.abs(back.values - f.values)) <= 1e-12 * scale

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.floats(-3, 3), st.floats(-3, 3))
    def test_linearity(self, seed, a, b):
        g = TorusGrid(64)
        f1 = random_field(g, seed)
        f2 = random_field(g, seed + 1)
        lhs = to_spectrum(Field(g, a * f1.values + b * f2.values)).coefficients
        rhs = a * to_spectrum(f1).coefficients + b * to_spectrum(f2).coefficients
        scale = max(np.max(np.abs(rhs)), 1e-30)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale

    def test_parseval(self, grid128):
        f = random_field(grid128, seed=7)
        s = to_spectrum(f)
        physical = np.sum(f.values**2) * grid128.dx
        spectral = 2 * math.pi / grid128.n**2 * np.sum(np.abs(s.coefficients) ** 2)
        assert physical == pytest.approx(spectral, rel=1e-12)

    def test_nonfinite_input_raises_with_index(self, grid64):
        vals = np.ones(64)
        vals[11] = np.nan
        with pytest.raises(NonFiniteFieldError) as exc:
            to_spectrum(Field(grid64, vals))
        assert exc.value.index == 11

    def test_zero_spectrum_gives_zero_field(self, grid64):
        f = from_spectrum(Spectrum(grid64, np.zeros(64, dtype=complex)))
        assert np.all(f.values == 0.0)

    def test_single_k0_coefficient(self, grid64):
        coeffs = np.zeros(64, dtype=complex)
        coeffs[0] = 64 * 2.5
        f = from_spectrum(Spectrum(grid64, coeffs))
        assert np.max(np.abs(f.values - 2.5)) < 1e-13

    def test_cos5_spectrum_inverts_exactly(self, grid64):
        target = np.cos(5 * grid64.x)
        f = from_spectrum(to_spectrum(Field(grid64, target)))
        assert np.max(np.abs(f.values - target)) < 1e-12

    def test_asymmetric_spectrum_rejected(self, grid64):
        coeffs = np.zeros(64, dtype=complex)
        coeffs[3] = 1.0  # no conjugate partner at -3
        with pytest.raises(SpectrumSymmetryError):
            from_spectrum(Spectrum(grid64, coeffs))


class TestReductions:
    def test_mean_constant(self, grid64):
        assert mean(Field(grid64, np.full(64, 4.5))) == pytest.approx(4.5)

    @pytest.mark.parametrize("k", [1, 2, 5])
    def test_mean_of_pure_mode_vanishes(self, grid64, k):
        assert abs(mean(Field(grid64, np.cos(k * grid64.x)))) < 1e-14

    def test_mean_with_offset(self, grid64):
        assert mean(Field(grid64, 1.0 + 0.5 * np.cos(grid64.x))) == pytest.approx(1.0, abs=1e-14)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.integers(-100, 100))
    def test_mean_rotation_invariant(self, seed, shift):
        g = TorusGrid(64)
        f = random_field(g, seed)
        rotated = Field(g, np.roll(f.values, shift))
        assert mean(rotated) == pytest.approx(mean(f), abs=1e-13)

    def test_extrema_zero_field(self, grid64):
        assert extrema(Field(grid64, np.zeros(64))) == (0.0, 0, 0.0, 0)

    def test_extrema_cos_on_16(self):
        g = TorusGrid(16)
        mn, imin, mx, imax = extrema(Field(g, np.cos(g.x)))
        assert (mx, imax) == (pytest.approx(1.0), 8)
        assert (mn, imin) == (pytest.approx(-1.0), 0)

    def test_extrema_sin(self):
        g = TorusGrid(16)
        mn, imin, mx, imax = extrema(Field(g, np.sin(g.x)))
        assert g.x[imax] == pytest.approx(math.pi / 2)
        assert g.x[imin] == pytest.approx(-math.pi / 2)
        assert mx == pytest.approx(1.0)
        assert mn == pytest.approx(-1.0)

    def test_extrema_tie_breaks_low_index(self, grid64):
        vals = np.zeros(64)
        vals[[10, 20]] = 1.0
        vals[[30, 40]] = -1.0
        _, imin, _, imax = extrema(Field(grid64, vals))
        assert (imin, imax) == (30, 10)


class TestSerialization:
    def test_csv_round_trip_exact(self, grid64, tmp_path):
        f = random_field(grid64, seed=3)
        path = tmp_path / "f.csv"
        field_to_csv(f, path)
        back = field_from_csv(path)
        assert back.grid.n == 64
        assert np.array_equal(back.values, f.values)

    def test_csv_header_enforced(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n0,1\n")
        with pytest.raises(ValueError):
            field_from_csv(path)

    def test_json_round_trip_exact(self, grid128):
        f = random_field(grid128, seed=9)
        back = field_from_json(field_to_json(f), grid128)
        assert np.array_equal(back.values, f.values)

    def test_json_infers_grid(self, grid64):
        f = random_field(grid64, seed=5)
        back = field_from_json(field_to_json(f))
        assert back.grid.n == 64

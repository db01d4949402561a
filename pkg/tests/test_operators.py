import itertools
import math

import numpy as np
import pytest

from fracks.grid import Field, TorusGrid, from_spectrum, mean, to_spectrum
from fracks.operators import (
    DriftVariant,
    apply_symbol,
    dealias,
    dealias_keep_mask,
    derivative,
    drift,
    drift_symbol,
    fractional_laplacian,
    fractional_symbol,
    heat_symbol,
    hilbert,
    hilbert_symbol,
    mollify,
    potential_symbol,
    solve_potential,
)

from conftest import random_field


class TestFractionalLaplacian:
    @pytest.mark.parametrize(
        "k,s", list(itertools.product(range(1, 11), [0.5, 1.0, 1.5, 2.0]))
    )
    def test_cosine_symbol(self, grid128, k, s):
        out = fractional_laplacian(Field(grid128, np.cos(k * grid128.x)), s)
        expected = k**s * np.cos(k * grid128.x)
        assert np.max(np.abs(out.values - expected)) <= 1e-12 * k**s

    def test_annihilates_constants(self, grid64):
        for s in (0.3, 1.0, 2.0):
            out = fractional_laplacian(Field(grid64, np.full(64, 5.0)), s)
            assert np.max(np.abs(out.values)) < 1e-12

    def test_s_zero_is_identity(self, grid64):
        f = random_field(grid64, seed=2)
        out = fractional_laplacian(f, 0.0)
        assert np.max(np.abs(out.values - f.values)) < 1e-13

    def test_output_mean_zero_for_positive_order(self, grid64):
        f = Field(grid64, 2.0 + random_field(grid64, seed=4).values)
        out = fractional_laplacian(f, 0.7)
        assert abs(mean(out)) < 1e-13

    def test_negative_order_rejected(self, grid64):
        with pytest.raises(ValueError):
            fractional_laplacian(random_field(grid64, seed=1), -0.5)


class TestHilbert:
    def test_kills_constants(self, grid64):
        out = hilbert(Field(grid64, np.full(64, 7.0)))
        assert np.max(np.abs(out.values)) < 1e-12

    @pytest.mark.parametrize("k", [1, 2, 7])
    def test_cos_to_sin(self, grid64, k):
        out = hilbert(Field(grid64, np.cos(k * grid64.x)))
        assert np.max(np.abs(out.values - np.sin(k * grid64.x))) < 1e-12

    def test_squares_to_minus_mean_free_part(self, grid128):
        f = Field(grid128, 1.5 + random_field(grid128, seed=8).values)
        twice = hilbert(hilbert(f))
        expected = -(f.values - mean(f))
        assert np.max(np.abs(twice.values - expected)) <= 1e-12 * np.max(np.abs(f.values))

    def test_output_mean_zero(self, grid64):
        out = hilbert(random_field(grid64, seed=3))
        assert abs(mean(out)) < 1e-13

    def test_nyquist_zeroed(self, grid64):
        sym = hilbert_symbol(grid64)
        assert sym[0] == 0.0
        assert sym[grid64.nyquist_index] == 0.0


class TestSolvePotential:
    def test_helmholtz_constant(self, grid64):
        v = solve_potential(Field(grid64, np.full(64, 2.0)), 2.0, DriftVariant.HELMHOLTZ)
        assert np.max(np.abs(v.values - 2.0)) < 1e-13

    @pytest.mark.parametrize("k,beta", [(1, 2.0), (3, 2.0), (2, 0.7)])
    def test_helmholtz_symbol(self, grid64, k, beta):
        v = solve_potential(Field(grid64, np.cos(k * grid64.x)), beta, DriftVariant.HELMHOLTZ)
        expected = np.cos(k * grid64.x) / (1.0 + k**beta)
        assert np.max(np.abs(v.values - expected)) < 1e-12

    @pytest.mark.parametrize("variant", list(DriftVariant))
    def test_defining_equation_residual(self, grid128, variant):
        u = Field(grid128, random_field(grid128, seed=10).values ** 2 + 0.1)
        beta = 2.0
        v = solve_potential(u, beta, variant)
        lam_v = fractional_laplacian(v, beta)
        if variant is DriftVariant.HELMHOLTZ:
            residual = v.values + lam_v.values - u.values
        else:
            residual = lam_v.values - (u.values - mean(u))
        assert np.max(np.abs(residual)) <= 1e-10 * np.max(np.abs(u.values))

    def test_riesz_exactness_tight(self, grid64):
        # k^beta-amplified round-off stays below 1e-12 on small grids
        u = Field(grid64, random_field(grid64, seed=11, kmax=10).values ** 2 + 0.2)
        v = solve_potential(u, 2.0, DriftVariant.RIESZ)
        lam_v = fractional_laplacian(v, 2.0)
        dev = np.max(np.abs(lam_v.values - (u.values - mean(u))))
        assert dev <= 1e-12 * np.max(np.abs(u.values))

    def test_nonneg_data_gives_nonneg_potential(self, grid256):
        rng = np.random.default_rng(0)
        worst = 0.0
        for trial in range(1000):
            g = random_field(grid256, seed=trial, kmax=20)
            u = Field(grid256, g.values**2 + 1e-3)
            v = solve_potential(u, 2.0, DriftVariant.HELMHOLTZ)
            worst = min(worst, float(np.min(v.values)) / np.max(np.abs(u.values)))
        assert worst >= -1e-10

    def test_bad_beta_rejected(self, grid64):
        for beta in (0.0, -1.0):
            with pytest.raises(ValueError):
                solve_potential(random_field(grid64, seed=1), beta, DriftVariant.HELMHOLTZ)


class TestDrift:
    def test_constant_gives_zero(self, grid64):
        out = drift(Field(grid64, np.full(64, 3.0)), 2.0, DriftVariant.HELMHOLTZ)
        assert np.max(np.abs(out.values)) < 1e-13

    @pytest.mark.parametrize("k,beta", [(1, 2.0), (4, 2.0), (2, 1.5), (3, 0.5)])
    def test_helmholtz_symbol_composition(self, grid64, k, beta):
        out = drift(Field(grid64, np.cos(k * grid64.x)), beta, DriftVariant.HELMHOLTZ)
        expected = k ** (beta - 1.0) / (1.0 + k**beta) * np.sin(k * grid64.x)
        assert np.max(np.abs(out.values - expected)) < 1e-12

    def test_riesz_beta2_matches_classical_drift(self, grid64):
        out = drift(Field(grid64, np.cos(grid64.x)), 2.0, DriftVariant.RIESZ)
        assert np.max(np.abs(out.values - np.sin(grid64.x))) < 1e-12

    def test_small_beta_multiplier_bounded(self, grid128):
        sym = drift_symbol(grid128, 0.25, DriftVariant.HELMHOLTZ)
        assert np.all(np.isfinite(sym))
        assert sym[0] == 0.0

    def test_bad_beta_rejected(self, grid64):
        with pytest.raises(ValueError):
            drift(random_field(grid64, seed=1), -2.0, DriftVariant.RIESZ)


class TestMollify:
    def test_preserves_constants(self, grid64):
        out = mollify(Field(grid64, np.full(64, 2.0)), 0.3)
        assert np.max(np.abs(out.values - 2.0)) < 1e-14

    @pytest.mark.parametrize("k,eps", [(1, 0.1), (3, 0.05), (5, 1.0)])
    def test_heat_multiplier(self, grid64, k, eps):
        out = mollify(Field(grid64, np.cos(k * grid64.x)), eps)
        expected = math.exp(-(k**2) * eps) * np.cos(k * grid64.x)
        assert np.max(np.abs(out.values - expected)) < 1e-12

    def test_identity_limit(self, grid128):
        f = random_field(grid128, seed=6, kmax=20)
        out = mollify(f, 1e-8)
        assert np.max(np.abs(out.values - f.values)) <= 1e-6

    def test_preserves_mean_exactly(self, grid64):
        f = Field(grid64, random_field(grid64, seed=12).values + 2.0)
        assert mean(mollify(f, 0.2)) == pytest.approx(mean(f), abs=1e-14)

    def test_preserves_nonnegativity_when_resolved(self, grid128):
        # kernel resolved: exp(-(n/2)^2 eps) negligible at eps = 0.01, n = 128
        rng = np.random.default_rng(1)
        for trial in range(50):
            g = random_field(grid128, seed=trial, kmax=20)
            u = Field(grid128, g.values**2)
            out = mollify(u, 0.01)
            assert float(np.min(out.values)) >= -1e-12 * max(1.0, np.max(u.values))

    def test_bad_eps_rejected(self, grid64):
        with pytest.raises(ValueError):
            mollify(random_field(grid64, seed=1), 0.0)


class TestDealias:
    def test_band_limited_unchanged(self, grid64):
        f = random_field(grid64, seed=13, kmax=21)  # 21 = floor(64/3)
        s = to_spectrum(f)
        out = dealias(s)
        assert np.max(np.abs(out.coefficients - s.coefficients)) < 1e-12 * 64

    def test_nyquist_mode_zeroed(self, grid64):
        f = Field(grid64, np.cos(32 * grid64.x))
        out = from_spectrum(dealias(to_spectrum(f)))
        assert np.max(np.abs(out.values)) < 1e-12

    def test_idempotent(self, grid128):
        s = to_spectrum(random_field(grid128, seed=14, kmax=60))
        once = dealias(s).coefficients
        twice = dealias(dealias(s)).coefficients
        assert np.array_equal(once, twice)

    def test_cutoff_matches_n_over_3(self, grid64):
        keep = dealias_keep_mask(grid64)
        kept = set(np.abs(grid64.wavenumbers[keep]).tolist())
        assert max(kept) == 21
        assert 22 not in kept


class TestMultiplierAlgebra:
    def test_all_multipliers_commute(self, grid64):
        f = random_field(grid64, seed=15)
        symbols = [
            fractional_symbol(grid64, 0.7),
            hilbert_symbol(grid64),
            potential_symbol(grid64, 2.0, DriftVariant.HELMHOLTZ),
            drift_symbol(grid64, 2.0, DriftVariant.RIESZ),
            heat_symbol(grid64, 0.05),
        ]
        scale = np.max(np.abs(f.values)) + 1.0
        for a, b in itertools.combinations(symbols, 2):
            ab = apply_symbol(apply_symbol(f, a), b).values
            ba = apply_symbol(apply_symbol(f, b), a).values
            assert np.max(np.abs(ab - ba)) <= 1e-12 * scale

    def test_derivative_of_hilbert_is_fractional_laplacian(self, grid64):
        f = random_field(grid64, seed=16, kmax=20)
        lhs = derivative(hilbert(f)).values
        rhs = fractional_laplacian(f, 1.0).values
        assert np.max(np.abs(lhs - rhs)) <= 1e-11 * (1 + np.max(np.abs(rhs)))


class TestEllipticEstimates:
    """Spot checks of the potential bounds; the full randomized suites live in
    test_verification."""

    def test_riesz_sup_bounds(self, grid128):
        rng = np.random.default_rng(2)
        for trial in range(100):
            g = random_field(grid128, seed=trial + 500, kmax=20)
            u = Field(grid128, g.values**2 + 1e-3)
            v = solve_potential(u, 2.0, DriftVariant.RIESZ)
            lam_v = fractional_laplacian(v, 2.0)
            linf_u = np.max(np.abs(u.values))
            assert np.max(np.abs(lam_v.values)) <= linf_u * (1 + 1e-10)
            assert np.max(np.abs(derivative(lam_v).values)) <= np.max(
                np.abs(derivative(u).values)
            ) * (1 + 1e-10)

    def test_helmholtz_energy_split_modewise(self, grid64):
        u = random_field(grid64, seed=42)
        v = solve_potential(u, 2.0, DriftVariant.HELMHOLTZ)
        from fracks.diagnostics import homogeneous_sobolev

        for s_aux in (0.0, 0.5, 1.0):
            lhs = (
                0.5 * homogeneous_sobolev(v, 2.0 + s_aux) ** 2
                + homogeneous_sobolev(v, 1.0 + s_aux) ** 2
            )
            rhs = 0.5 * homogeneous_sobolev(u, s_aux) ** 2
            assert lhs <= rhs * (1 + 1e-12)

"""Grid containers and Fourier-multiplier operators."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fractrans.grid import Field, GridSpec
from fractrans.operators import (bump, bump_mass, dealias, dealias_spectrum,
                                 derivative, heat_semigroup, hilbert,
                                 lambda_alpha, mollifier_kernel, mollify)


class TestGridSpec:
    def test_spacing_and_nodes(self):
        g = GridSpec(50.0, 512)
        assert g.spacing == pytest.approx(100.0 / 512)
        assert g.nodes[0] == pytest.approx(-50.0)
        assert g.nodes[-1] == pytest.approx(50.0 - g.spacing)

    def test_wavenumbers_fft_order(self):
        g = GridSpec(50.0, 8)
        assert g.wavenumbers[1] == pytest.approx(np.pi / 50.0)
        assert g.wavenumbers[-1] == pytest.approx(-np.pi / 50.0)
        assert g.nyquist_index == 4

    @pytest.mark.parametrize("n", [0, 3, 511, -4])
    def test_rejects_bad_point_counts(self, n):
        with pytest.raises(ValueError):
            GridSpec(50.0, n)

    def test_rejects_large_prime_factor(self):
        with pytest.raises(ValueError, match="small primes"):
            GridSpec(50.0, 2 * 11)

    def test_rejects_nonpositive_length(self):
        with pytest.raises(ValueError):
            GridSpec(0.0, 64)


class TestField:
    def test_roundtrip_views(self, grid_small):
        rng = np.random.default_rng(0)
        s = rng.standard_normal(grid_small.n_points)
        f = Field.from_samples(grid_small, s)
        g = Field.from_spectrum(grid_small, f.spectrum)
        np.testing.assert_allclose(g.samples, s, atol=1e-12)

    def test_immutable(self, grid_small):
        f = Field.from_samples(grid_small, np.zeros(grid_small.n_points))
        with pytest.raises(ValueError):
            f.samples[0] = 1.0

    def test_requires_exactly_one_view(self, grid_small):
        z = np.zeros(grid_small.n_points)
        with pytest.raises(ValueError):
            Field(grid_small, samples=z, spectrum=z)
        with pytest.raises(ValueError):
            Field(grid_small)

    def test_arithmetic_checks_grid(self, grid_small):
        other = GridSpec(50.0, 256)
        a = Field.from_samples(grid_small, np.zeros(grid_small.n_points))
        b = Field.from_samples(other, np.zeros(other.n_points))
        with pytest.raises(ValueError):
            a + b

    def test_l2_norm_constant(self, grid_small):
        f = Field.from_samples(grid_small, np.ones(grid_small.n_points))
        assert f.l2_norm() == pytest.approx(np.sqrt(100.0))


def _sine(grid, j):
    return Field.from_samples(grid, np.sin(np.pi * j * grid.nodes
                                           / grid.half_length))


class TestMultipliers:
    def test_hilbert_of_sine_is_cosine(self, grid_small):
        # multiplier i*sign(k): H sin(kx) = cos(kx)
        f = _sine(grid_small, 3)
        k = 3 * np.pi / grid_small.half_length
        expected = np.cos(k * grid_small.nodes)
        np.testing.assert_allclose(hilbert(f).samples, expected, atol=1e-12)

    def test_dx_hilbert_is_minus_lambda(self, grid_small):
        f = _sine(grid_small, 5)
        lhs = derivative(hilbert(f)).samples
        rhs = -lambda_alpha(f, 1.0).samples
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_hilbert_lambda_is_dx(self, grid_small):
        f = _sine(grid_small, 5)
        np.testing.assert_allclose(hilbert(lambda_alpha(f, 1.0)).samples,
                                   derivative(f).samples, atol=1e-12)

    def test_lambda_on_single_mode(self, grid_small):
        f = _sine(grid_small, 4)
        k = 4 * np.pi / grid_small.half_length
        for alpha in (0.25, 0.5, 1.0, 1.5, 2.0):
            np.testing.assert_allclose(lambda_alpha(f, alpha).samples,
                                       k**alpha * f.samples, atol=1e-10)

    def test_lambda_rejects_bad_order(self, grid_small):
        f = _sine(grid_small, 1)
        for alpha in (0.0, -0.5, 2.5):
            with pytest.raises(ValueError):
                lambda_alpha(f, alpha)

    def test_derivative_matches_closed_form(self, grid_small):
        x = grid_small.nodes
        k = 2 * np.pi / grid_small.half_length
        f = Field.from_samples(grid_small, np.sin(k * x))
        np.testing.assert_allclose(derivative(f, 2).samples,
                                   -(k**2) * np.sin(k * x), atol=1e-10)

    def test_heat_semigroup_decay(self, grid_small):
        f = _sine(grid_small, 4)
        k = 4 * np.pi / grid_small.half_length
        out = heat_semigroup(f, 2.0, 0.1)
        np.testing.assert_allclose(out.samples,
                                   np.exp(-0.1 * 2.0 * k**2) * f.samples,
                                   atol=1e-12)
        with pytest.raises(ValueError):
            heat_semigroup(f, -1.0, 0.1)
        with pytest.raises(ValueError):
            heat_semigroup(f, 1.0, 0.0)

    @given(st.integers(min_value=1, max_value=60),
           st.floats(min_value=-3.0, max_value=3.0,
                     allow_nan=False, allow_infinity=False))
    @settings(max_examples=25, deadline=None)
    def test_hilbert_isometry_on_modes(self, j, amp):
        grid = GridSpec(50.0, 256)
        f = Field.from_samples(
            grid, amp * np.sin(np.pi * j * grid.nodes / grid.half_length))
        assert hilbert(f).l2_norm() == pytest.approx(f.l2_norm(), abs=1e-10)

    def test_hilbert_squared_is_minus_identity_mod_mean(self, grid_small):
        rng = np.random.default_rng(3)
        s = rng.standard_normal(grid_small.n_points)
        s -= s.mean()
        spec = np.fft.fft(s)
        spec[grid_small.nyquist_index] = 0.0  # unpaired mode is annihilated
        f = Field.from_spectrum(grid_small, spec)
        np.testing.assert_allclose(hilbert(hilbert(f)).samples, -f.samples,
                                   atol=1e-10)


class TestBumpAndMollifier:
    def test_bump_support(self):
        x = np.array([-1.5, -1.0, 0.0, 0.99, 1.0, 2.0])
        vals = bump(x)
        assert vals[0] == vals[1] == vals[4] == vals[5] == 0.0
        assert vals[2] == pytest.approx(np.exp(-1.0))

    def test_bump_mass_positive(self):
        assert 0.4 < bump_mass() < 0.5

    def test_mollifier_unit_mass(self, grid_small):
        kern = mollifier_kernel(grid_small, 0.5)
        assert grid_small.spacing * kern.sum() == pytest.approx(1.0)

    def test_mollify_preserves_mean_and_sign(self, grid_small):
        x = grid_small.nodes
        f = Field.from_samples(grid_small, np.exp(-(x / 3.0) ** 2))
        g = mollify(f, 0.5)
        assert g.mean() == pytest.approx(f.mean(), rel=1e-10)
        assert float(np.min(g.samples)) >= -1e-14
        assert g.sup_norm() <= f.sup_norm() + 1e-14

    def test_mollify_rejects_bad_eta(self, grid_small):
        f = Field.from_samples(grid_small, np.zeros(grid_small.n_points))
        with pytest.raises(ValueError):
            mollify(f, 0.0)
        with pytest.raises(ValueError):
            mollify(f, 20.0)


class TestDealias:
    def test_two_thirds_rule(self):
        g = GridSpec(50.0, 12)
        spec = np.ones(12, dtype=complex)
        out = dealias_spectrum(spec)
        kept = np.abs(np.fft.fftfreq(12, d=1.0 / 12)) <= 4
        np.testing.assert_array_equal(out[kept], 1.0)
        np.testing.assert_array_equal(out[~kept], 0.0)

    def test_idempotent(self, grid_small):
        rng = np.random.default_rng(1)
        f = Field.from_samples(grid_small,
                               rng.standard_normal(grid_small.n_points))
        once = dealias(f)
        twice = dealias(once)
        np.testing.assert_array_equal(once.spectrum, twice.spectrum)

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from anslab.fields import (ConfigurationError, Grid3, SpectralField3, VectorField3, dealias,
                           forward_transform, inverse_transform, spectral_inner)


class TestGrid:
    """Construction rules and derived quantities of the periodic grid."""

    def test_rejects_odd_and_tiny_sizes(self):
        with pytest.raises(ConfigurationError):
            Grid3(15, 16, 16)
        with pytest.raises(ConfigurationError):
            Grid3(4, 16, 16)

    def test_volume_and_cells(self, grid16):
        assert grid16.volume == pytest.approx((2 * np.pi) ** 3)
        assert grid16.cell_volume * grid16.size == pytest.approx(grid16.volume)

    def test_derivative_wavenumbers_drop_nyquist(self, grid16):
        assert grid16.kd[0][8] == 0.0
        assert grid16.k[0][8] != 0.0

    def test_refined_keeps_box(self, grid16):
        g = grid16.refined(2)
        assert g.shape == (32, 32, 32)
        assert g.lengths == grid16.lengths


class TestTransform:
    def test_constant_is_dc_mode(self, grid16):
        f = forward_transform(np.ones(grid16.shape), grid16)
        expected = np.zeros(grid16.shape, dtype=complex)
        expected[0, 0, 0] = 1.0
        np.testing.assert_allclose(f.coeffs, expected, atol=1e-15)

    def test_sine_coefficients(self, grid16):
        x1, _, _ = grid16.mesh()
        c = forward_transform(np.sin(x1), grid16).coeffs
        assert c[1, 0, 0] == pytest.approx(-0.5j, abs=1e-15)
        assert c[-1, 0, 0] == pytest.approx(0.5j, abs=1e-15)
        c[1, 0, 0] = c[-1, 0, 0] = 0
        assert np.max(np.abs(c)) < 1e-15

    def test_round_trip(self, grid16, rng):
        a = rng.standard_normal(grid16.shape)
        back = inverse_transform(forward_transform(a, grid16))
        assert np.max(np.abs(back - a)) < 1e-12

    def test_parseval(self, grid16, rng):
        a = rng.standard_normal(grid16.shape)
        f = forward_transform(a, grid16)
        direct = np.sqrt(np.sum(a * a) * grid16.cell_volume)
        assert f.l2_norm() == pytest.approx(direct, rel=1e-12)
        assert spectral_inner(f, f) == pytest.approx(direct**2, rel=1e-12)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31 - 1), st.sampled_from([8, 10, 12]))
    def test_round_trip_property(self, seed, n):
        g = Grid3(n, n + 2, 8)
        a = np.random.default_rng(seed).standard_normal(g.shape)
        f = forward_transform(a, g)
        assert np.max(np.abs(inverse_transform(f) - a)) < 1e-12
        assert f.hermitian_defect() < 1e-12


def single_mode(grid, xi):
    c = np.zeros(grid.shape, dtype=complex)
    c[xi] = 0.5
    c[tuple(-i for i in xi)] = 0.5
    return SpectralField3(grid, c)


class TestDealias:
    def test_inside_cutoff_unchanged(self, grid32):
        f = single_mode(grid32, (1, 1, 1))
        np.testing.assert_array_equal(dealias(f).coeffs, f.coeffs)

    def test_outside_cutoff_removed(self, grid32):
        assert not np.any(dealias(single_mode(grid32, (12, 0, 0))).coeffs)

    def test_cutoff_edge(self, grid32):
        assert np.any(dealias(single_mode(grid32, (10, 0, 0))).coeffs)
        assert not np.any(dealias(single_mode(grid32, (0, 11, 0))).coeffs)

    def test_zero_stays_zero(self, grid32):
        assert not np.any(dealias(SpectralField3.zeros(grid32)).coeffs)


class TestVectorField:
    def test_derivative_of_sine(self, grid16):
        x1, _, _ = grid16.mesh()
        f = forward_transform(np.sin(3 * x1), grid16)
        np.testing.assert_allclose(f.derivative(0).to_real(), 3 * np.cos(3 * x1), atol=1e-12)

    def test_divergence_free_detection(self, grid16):
        x1, x2, _ = grid16.mesh()
        z = np.zeros(grid16.shape)
        swirl = VectorField3.from_real(np.stack([np.sin(x2), np.sin(x1), z]), grid16)
        grad = VectorField3.from_real(np.stack([np.cos(x1), z, z]), grid16)
        assert swirl.is_divergence_free()
        assert not grad.is_divergence_free()

    def test_energy_is_squared_norm(self, grid16):
        x1, _, _ = grid16.mesh()
        z = np.zeros(grid16.shape)
        u = VectorField3.from_real(np.stack([np.sin(x1), z, z]), grid16)
        assert u.energy() == pytest.approx(4 * np.pi**3, rel=1e-12)
        assert u.energy() == pytest.approx(u.l2_norm() ** 2, rel=1e-14)

    def test_arithmetic_and_grid_mismatch(self, grid16, grid32):
        u = VectorField3.zeros(grid16)
        v = (u + u) * 2.0 - u
        assert not np.any(v.coeffs)
        with pytest.raises(ConfigurationError):
            u + VectorField3.zeros(grid32)

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from anslab.fields import ConfigurationError, SpectralField3, forward_transform, ifft3
from anslab.littlewood_paley import (DyadicSystem, bony_vertical_split, chi, decompose, full_block,
                                     lp_check, partition_defects, phi, random_scalar, vertical_block,
                                     vertical_lowpass, vertical_mean)


class TestProfiles:
    """The cutoff chi and the annulus profile phi."""

    def test_chi_flat_and_zero_regions(self):
        assert np.all(chi(np.linspace(0, 0.75, 20)) == 1.0)
        assert np.all(chi(np.linspace(4 / 3, 10, 20)) == 0.0)

    def test_chi_monotone(self):
        t = np.linspace(0, 2, 2001)
        assert np.all(np.diff(chi(t)) <= 0)

    def test_phi_support(self):
        t = np.linspace(0, 4, 4001)
        p = phi(t)
        assert np.all(p[(t < 0.75) | (t > 8 / 3)] == 0.0)
        assert np.all(p >= 0)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(min_value=1e-3, max_value=1e3))
    def test_partition_sums_to_one(self, tau):
        total = sum(phi(tau * 2.0 ** (-j)) for j in range(-15, 16))
        assert abs(float(total) - 1.0) < 1e-12


class TestBlocks:
    def test_vertical_mean_only_field_has_no_blocks(self, grid16):
        x1, x2, _ = grid16.mesh()
        f = forward_transform(np.sin(x1) * np.cos(x2), grid16)
        sys = DyadicSystem.for_grid(grid16)
        for j in sys.indices:
            assert np.max(np.abs(vertical_block(f, j, sys).coeffs)) == 0.0

    def test_support_of_sin4x3(self, grid32):
        x1, x2, x3 = grid32.mesh()
        f = forward_transform(np.cos(x1 + x2) * np.sin(4 * x3), grid32)
        sys = DyadicSystem.for_grid(grid32)
        live = [j for j in sys.indices if np.max(np.abs(vertical_block(f, j, sys).coeffs)) > 1e-14]
        assert live == [1, 2]

    def test_lowpass_identity_beyond_nyquist(self, grid16, rng):
        f = forward_transform(rng.standard_normal(grid16.shape), grid16)
        j = int(np.log2(8)) + 1
        np.testing.assert_array_equal(vertical_lowpass(f, j).coeffs, f.coeffs)

    def test_lowpass_vanishes_far_below(self, grid16):
        x3 = grid16.mesh()[2]
        f = forward_transform(np.sin(x3) + np.cos(5 * x3), grid16)
        assert np.max(np.abs(vertical_lowpass(f, -3).coeffs)) < 1e-15

    def test_lowpass_single_mode_scaled_by_chi(self, grid16):
        x3 = grid16.mesh()[2]
        f = forward_transform(np.sin(x3), grid16)
        out = vertical_lowpass(f, 0).coeffs
        np.testing.assert_allclose(out, f.coeffs * chi(1.0), atol=1e-16)

    def test_full_block_uses_full_magnitude(self, grid16):
        x1, x2, _ = grid16.mesh()
        f = forward_transform(np.sin(3 * x1 + 4 * x2), grid16)  # |xi| = 5
        sys = DyadicSystem.for_grid(grid16, "full")
        assert np.max(np.abs(full_block(f, 2, sys).coeffs)) == pytest.approx(0.5 * phi(5 / 4), abs=1e-15)

    def test_wrong_direction_rejected(self, grid16):
        f = SpectralField3.zeros(grid16)
        with pytest.raises(ConfigurationError):
            vertical_block(f, 0, DyadicSystem.for_grid(grid16, "full"))


class TestReconstruction:
    def test_partition_defects_zero(self, grid32):
        assert max(partition_defects(grid32).values()) < 1e-12

    @pytest.mark.parametrize("inhomogeneous", [False, True])
    def test_decompose_reconstructs(self, grid16, rng, inhomogeneous):
        f = forward_transform(rng.standard_normal(grid16.shape), grid16)
        back = decompose(f, "vertical", inhomogeneous=inhomogeneous).reconstruct()
        assert np.max(np.abs(back.coeffs - f.coeffs)) < 1e-14

    def test_vertical_mean_is_remainder(self, grid16, rng):
        f = forward_transform(rng.standard_normal(grid16.shape), grid16)
        np.testing.assert_allclose(decompose(f).remainder.coeffs, vertical_mean(f).coeffs, atol=1e-16)


class TestBony:
    def _product(self, f, g):
        grid = f.grid
        return np.where(grid.dealias_mask, np.fft.fftn(ifft3(f.coeffs).real * ifft3(g.coeffs).real,
                                                        norm="forward"), 0)

    def test_constant_g_puts_everything_in_low_high_and_remainder(self, grid16, rng):
        f = random_scalar(grid16, rng)
        g = forward_transform(np.full(grid16.shape, 2.0), grid16)
        split = bony_vertical_split(f, g)
        assert np.max(np.abs(split.high_low.coeffs)) < 1e-15
        np.testing.assert_allclose(split.total().coeffs, self._product(f, g), atol=1e-14)

    def test_square_reconstructs(self, grid16, rng):
        f = random_scalar(grid16, rng)
        split = bony_vertical_split(f, f)
        prod = self._product(f, f)
        assert np.linalg.norm(split.total().coeffs - prod) / np.linalg.norm(prod) < 1e-9

    def test_random_pairs_reconstruct(self, grid16, rng):
        for _ in range(5):
            f, g = random_scalar(grid16, rng), random_scalar(grid16, rng)
            prod = self._product(f, g)
            err = np.linalg.norm(bony_vertical_split(f, g).total().coeffs - prod) / np.linalg.norm(prod)
            assert err < 1e-9

    def test_grid_mismatch(self, grid16, grid32):
        with pytest.raises(ConfigurationError):
            bony_vertical_split(SpectralField3.zeros(grid16), SpectralField3.zeros(grid32))


def test_lp_check_suite_passes():
    report = lp_check(16, pairs=5, seed=3)
    assert report.passed
    assert report.to_dict()["passed"] is True

import math

import numpy as np
import pytest

from anslab.fields import ConfigurationError
from anslab.inequalities import (Box, FieldSampler, band_spread, bernstein_ratio, check_aniso_gn,
                                 check_bernstein, check_commutator, check_product_law, commutator_ratio,
                                 gn_ratio, l42_worked_example, product_ratio, spectral_l2, spectral_lp)


def modes(box, f):
    return box.fft(f(*box.coordinates()) + np.zeros(box.shape))


class TestQuadrature:
    """Norm evaluation on padded grids."""

    def test_l4_of_trig_product(self):
        box = Box((16, 16, 16))
        c = modes(box, lambda x, y, z: np.sin(x) * np.sin(y) * np.sin(z))
        assert spectral_lp(c, box, 4) == pytest.approx((3 * math.pi / 4) ** 0.75, rel=1e-13)
        assert spectral_l2(c, box) == pytest.approx(math.pi**1.5, rel=1e-13)

    def test_sup_norm(self):
        box = Box((16, 16))
        c = modes(box, lambda x, y: 2 * np.cos(x) * np.cos(y))
        assert spectral_lp(c, box, math.inf) == pytest.approx(2.0, rel=1e-13)


class TestAnisotropicSobolev:
    def test_l42_worked_example(self):
        quad, closed = l42_worked_example()
        assert quad == pytest.approx(closed, abs=1e-6)
        assert closed == pytest.approx(0.48860251190291987, rel=1e-15)

    def test_l43_trig_product(self):
        box = Box((16, 16, 16))
        c = modes(box, lambda x, y, z: np.sin(x) * np.sin(y) * np.sin(z))
        assert gn_ratio(c, box, "L43") == pytest.approx((3 * math.pi / 4) ** 0.75 / math.pi**1.5, rel=1e-12)

    def test_periodic_dilation_factor(self):
        """Doubling the x1 frequency of a torus mode keeps every Lebesgue
        norm but doubles the x1 derivative, so the ratio drops by 2^(-1/4)."""
        box = Box((32, 32))
        f = modes(box, lambda x, y: np.sin(x) * np.sin(y))
        g = modes(box, lambda x, y: np.sin(2 * x) * np.sin(y))
        assert gn_ratio(g, box, "L42") / gn_ratio(f, box, "L42") == pytest.approx(2**-0.25, rel=1e-12)

    def test_localised_packet_dilation(self):
        """A packet far from the cell boundary behaves as on the plane, where
        the ratio is invariant under x1 -> 2 x1."""
        box = Box((128, 128))

        def packet(x, y, s):
            dx, dy = s * x - math.pi, y - math.pi
            return np.exp(-(dx**2 + dy**2) / (2 * 0.4**2)) * np.cos(3 * dx + 2 * dy)

        f = modes(box, lambda x, y: packet(x, y, 1.0))
        g = modes(box, lambda x, y: packet(x + math.pi / 2, y, 2.0))
        rf, rg = gn_ratio(f, box, "L42"), gn_ratio(g, box, "L42")
        assert abs(rg / rf - 1) < 0.1

    def test_homogeneity(self):
        box = Box((32, 32))
        c = FieldSampler(box, (1, 4), seed=3).sample(0)
        assert gn_ratio(10 * c, box, "L42") == pytest.approx(gn_ratio(c, box, "L42"), rel=1e-12)
        assert gn_ratio(10 * c, box, "Lp2", 6) == pytest.approx(gn_ratio(c, box, "Lp2", 6), rel=1e-12)

    def test_lp2_at_two_is_one(self):
        box = Box((32, 32))
        c = FieldSampler(box, (1, 4), seed=1).sample(2)
        assert gn_ratio(c, box, "Lp2", 2) == pytest.approx(1.0, rel=1e-12)

    def test_dimension_and_variant_checks(self):
        with pytest.raises(ConfigurationError):
            gn_ratio(np.ones((8, 8, 8)), Box((8, 8, 8)), "L42")
        with pytest.raises(ConfigurationError):
            gn_ratio(np.ones((8, 8)), Box((8, 8)), "Lp2", math.inf)
        with pytest.raises(ConfigurationError):
            gn_ratio(np.ones((8, 8)), Box((8, 8)), "L99")

    def test_constant_field_rejected(self):
        box = Box((16, 16))
        c = np.zeros(box.shape, dtype=complex)
        c[0, 0] = 1.0
        assert math.isnan(gn_ratio(c, box, "L42"))

    def test_check_reports_counts(self):
        rep = check_aniso_gn(FieldSampler(Box((32, 32)), (1, 4)), "L42", samples=10)
        assert rep.samples + rep.rejected == 10
        assert rep.min_ratio <= rep.mean_ratio <= rep.max_ratio
        assert rep.worst["ratio"] == rep.max_ratio


class TestSampler:
    def test_deterministic(self):
        s = FieldSampler(Box((16, 16)), (1, 4), seed=7)
        np.testing.assert_array_equal(s.sample(3), s.sample(3))
        assert not np.array_equal(s.sample(3), s.sample(4))

    @pytest.mark.parametrize("law", ["packet", "gaussian"])
    def test_real_and_in_band(self, law):
        box = Box((16, 16, 16))
        s = FieldSampler(box, (2, 5), law=law)
        c = s.sample(0)
        f = np.fft.ifftn(c) * c.size
        assert np.max(np.abs(f.imag)) < 1e-12 * np.max(np.abs(f.real))
        k = box.kmag()
        live = np.abs(c) > 0
        assert live.any()
        assert k[live].min() >= 2 and k[live].max() <= 5

    def test_band_at_nyquist_rejected(self):
        with pytest.raises(ConfigurationError):
            FieldSampler(Box((16, 16)), (1, 8))

    def test_bad_band_and_law(self):
        with pytest.raises(ConfigurationError):
            FieldSampler(Box((16, 16)), (4, 2))
        with pytest.raises(ConfigurationError):
            FieldSampler(Box((16, 16)), (1, 4), law="uniform")


class TestBernstein:
    def test_single_vertical_mode(self):
        box = Box((8, 8, 64))
        c = modes(box, lambda x, y, z: np.cos(4 * z))
        for ell in (2, 3, 4):
            r = bernstein_ratio(c, box, ell, kind="ball", alpha=1, q1=2, q2=2)
            assert r == pytest.approx(4 / 2**ell, rel=1e-12)

    def test_vertically_constant_field(self):
        box = Box((8, 8, 32))
        c = modes(box, lambda x, y, z: np.sin(x) + 0 * z)
        for ell in (2, 3):
            r = bernstein_ratio(c, box, ell, kind="ball", alpha=0, q1=4, q2=2)
            assert r == pytest.approx((2 * math.pi) ** -0.25 * 2 ** (-ell / 4), rel=1e-12)

    def test_ring_single_mode(self):
        box = Box((8, 8, 64))
        c = modes(box, lambda x, y, z: np.sin(y) * np.cos(8 * z))
        assert bernstein_ratio(c, box, 3, kind="ring", N=1, q1=2, p_h=4) == pytest.approx(1.0, rel=1e-12)

    def test_ring_rejects_low_vertical_content(self):
        rep = check_bernstein(FieldSampler(Box((16, 16, 16)), (1, 4)), 3, kind="ring", samples=5)
        assert rep.samples == 0 and rep.rejected == 5
        assert not rep.finite

    def test_ball_order(self):
        with pytest.raises(ConfigurationError):
            bernstein_ratio(np.ones((8, 8, 8)), Box((8, 8, 8)), 2, q1=2, q2=4)


class TestProductLaw:
    def test_single_mode_closed_form(self):
        box = Box((32, 32))
        a, b, s1, s2 = 3, 1, 0.7, 0.6
        sig = s1 + s2 - 1
        cf = modes(box, lambda x, y: np.cos(a * x) + 0 * y)
        cg = modes(box, lambda x, y: np.cos(b * x) + 0 * y)
        vol = box.volume
        num = math.sqrt(vol / 8 * ((a + b) ** (2 * sig) + (a - b) ** (2 * sig)))
        den = math.sqrt(vol / 2 * a ** (2 * s1)) * math.sqrt(vol / 2 * b ** (2 * s2))
        assert product_ratio(cf, cg, box, s1, s2) == pytest.approx(num / den, rel=1e-12)

    def test_symmetric_in_arguments(self):
        box = Box((16, 16, 16))
        s = FieldSampler(box, (1, 4))
        f, g = s.sample(0), s.sample(1)
        assert product_ratio(f, g, box, 0.5, 0.5) == pytest.approx(product_ratio(g, f, box, 0.5, 0.5),
                                                                   rel=1e-12)

    def test_homogeneity(self):
        box = Box((32, 32))
        s = FieldSampler(box, (1, 4))
        f, g = s.sample(0), s.sample(1)
        assert product_ratio(10 * f, g, box, 0.4, 0.3) == pytest.approx(product_ratio(f, g, box, 0.4, 0.3),
                                                                        rel=1e-12)

    @pytest.mark.parametrize("s1,s2", [(1.5, 0.5), (0.2, -0.3), (-2.0, 2.5)])
    def test_inadmissible_exponents(self, s1, s2):
        with pytest.raises(ConfigurationError):
            check_product_law(FieldSampler(Box((16, 16, 16)), (1, 4)), s1, s2, samples=1)

    def test_endpoint_form_runs(self):
        rep = check_product_law(FieldSampler(Box((32, 32)), (1, 4)), 1.0, 0.3, samples=3, endpoint_eps=0.25)
        assert rep.finite


class TestCommutator:
    def test_single_mode_closed_form(self):
        box = Box((16, 16, 16))
        zero = np.zeros(box.shape, dtype=complex)
        cu = np.stack([modes(box, lambda x, y, z: np.sin(x) + 0 * y), zero, zero])
        s = 2.0
        expected = (2**s - 1) / (2 * 2**s * math.sqrt(box.volume / 2))
        assert commutator_ratio(cu, cu.copy(), box, s) == pytest.approx(expected, rel=1e-12)

    def test_constant_velocity_gives_zero(self):
        box = Box((16, 16, 16))
        cu = np.zeros((3,) + box.shape, dtype=complex)
        cu[0, 0, 0, 0] = 1.0
        s = FieldSampler(box, (1, 4))
        cB = np.stack([s.sample(i) for i in range(3)])
        assert commutator_ratio(cu, cB, box, 2.0) == 0.0

    def test_needs_s_above_half_dimension(self):
        s = FieldSampler(Box((16, 16, 16)), (1, 4))
        with pytest.raises(ConfigurationError):
            check_commutator(s, s, 1.5, samples=1)


def test_band_spread():
    from anslab.inequalities import RatioReport
    a = RatioReport("x", 1, 0, 2.0, 2.0, 2.0, {}, 0)
    b = RatioReport("x", 1, 0, 2.5, 2.5, 2.5, {}, 0)
    assert band_spread(a, b) == pytest.approx(0.25)
    assert band_spread(b, a) == pytest.approx(0.25)

import csv
import math

import numpy as np
import pytest

from anslab.dynamics import ViscosityTriple
from anslab.fields import ConfigurationError, Grid3, VectorField3
from anslab.initial import shear, taylor_green
from anslab.mild import (PicardConfig, PicardReport, Trajectory, duhamel_map, estimate_bilinear_norm,
                         free_evolution, picard_solve, quadrature_weights, uniform_nodes)
from anslab.norms import lp_norm


class TestQuadrature:
    @pytest.mark.parametrize("m", range(1, 12))
    def test_weights_sum_to_interval(self, m):
        assert quadrature_weights(m).sum() == pytest.approx(m, rel=1e-14)

    @pytest.mark.parametrize("m", range(2, 12))
    def test_exact_for_cubics(self, m):
        t = np.arange(m + 1, dtype=float)
        f = 1 + t - 0.3 * t**2 + 0.05 * t**3
        exact = m + m**2 / 2 - 0.1 * m**3 + 0.0125 * m**4
        assert quadrature_weights(m) @ f == pytest.approx(exact, rel=1e-13)


class TestDuhamelMap:
    def test_zero_trajectory_gives_semigroup(self, grid16):
        u0 = taylor_green(grid16)
        times = uniform_nodes(0.2, 5)
        out = duhamel_map(Trajectory.constant(VectorField3.zeros(grid16), times), u0, (0.1, 0.2, 0.3))
        ref = free_evolution(u0, (0.1, 0.2, 0.3), times)
        np.testing.assert_array_equal(out.coeffs, ref.coeffs)

    def test_all_zero(self, grid16):
        z = VectorField3.zeros(grid16)
        out = duhamel_map(Trajectory.constant(z, uniform_nodes(0.1, 4)), z, (1, 1, 1))
        assert not np.any(out.coeffs)

    def test_shear_is_heat_evolution(self, grid16):
        u0 = shear(grid16)
        nu = ViscosityTriple(0.5, 0.5, 0.5)
        times = uniform_nodes(0.5, 9)
        heat = free_evolution(u0, nu, times)
        assert (duhamel_map(heat, u0, nu) - heat).sup_norm() < 1e-14

    def test_horizon_mismatch(self, grid16):
        z = VectorField3.zeros(grid16)
        with pytest.raises(ConfigurationError):
            duhamel_map(Trajectory.constant(z, uniform_nodes(0.1, 4)), z, (1, 1, 1), t=0.2)

    def test_nonuniform_nodes_rejected(self, grid16):
        z = VectorField3.zeros(grid16)
        with pytest.raises(ConfigurationError):
            duhamel_map(Trajectory.constant(z, [0.0, 0.1, 0.3]), z, (1, 1, 1))


class TestPicard:
    def test_zero_data(self, grid16):
        _, rep = picard_solve(VectorField3.zeros(grid16), (1, 1, 1), PicardConfig(horizon=0.1, nodes=5))
        assert rep.converged and rep.iterations == 1 and rep.sup_diffs == [0.0]

    def test_geometric_convergence_small_data(self, grid16):
        u0 = taylor_green(grid16, amplitude=0.5)
        nu = ViscosityTriple(1, 1, 1)
        t = 0.1 * nu.nu3 / lp_norm(u0, math.inf) ** 2
        _, rep = picard_solve(u0, nu, PicardConfig(horizon=t, nodes=9))
        assert rep.converged
        assert all(r < 1 for r in rep.ratios)
        assert rep.residual < 1e-11

    def test_non_contraction_far_past_scale(self, grid32):
        # contraction scale nu3 / ||u0||^2 = 0.04; horizon 125x past it
        u0 = taylor_green(grid32, amplitude=5.0)
        _, rep = picard_solve(u0, (1, 1, 1), PicardConfig(horizon=5.0, nodes=17))
        assert rep.status == "non-contraction"
        assert rep.contraction_ratio > 1

    def test_report_csv(self, tmp_path):
        rep = PicardReport(sup_diffs=[1.0, 0.5, 0.1])
        rep.write_csv(tmp_path / "p.csv")
        rows = list(csv.reader(open(tmp_path / "p.csv")))
        assert rows[0] == ["iteration", "sup_diff", "ratio"]
        assert float(rows[3][2]) == pytest.approx(0.2)

    def test_config_validation(self):
        with pytest.raises(ConfigurationError):
            PicardConfig(horizon=0.0)
        with pytest.raises(ConfigurationError):
            PicardConfig(horizon=1.0, nodes=3)


class TestBilinearEstimate:
    def test_envelope_arithmetic(self):
        g = Grid3.cube(8)
        a = estimate_bilinear_norm((1, 1, 1), g, 10, horizon=0.1, nodes=5)
        b = estimate_bilinear_norm((1, 1, 1), g, 10, horizon=0.05, nodes=5)
        c = estimate_bilinear_norm((4, 4, 4), g, 10, horizon=0.1, nodes=5)
        assert b.envelope / a.envelope == pytest.approx(2**-0.5)
        assert c.envelope / a.envelope == pytest.approx(0.5)
        assert 0 < a.estimate < math.inf
        assert a.fitted_constant == pytest.approx(a.estimate / a.envelope)

    def test_sample_floor(self):
        with pytest.raises(ConfigurationError):
            estimate_bilinear_norm((1, 1, 1), Grid3.cube(8), 5)

import csv
import math

import pytest

from anslab.bounds import evaluate
from anslab.dynamics import ViscosityTriple
from anslab.fields import ConfigurationError, Grid3
from anslab.initial import taylor_green
from anslab.experiments import (InsufficientDataError, SweepResult, SweepRow, SweepSpec, bound_query,
                                eventual_smallness_probe, fit_scaling_exponent, linf_envelope,
                                log_spaced, nondecreasing, run_sweep, scaling_covariance_test)

SMALL = dict(grid=(16, 16, 16), horizon=0.3, dt_max=0.05)


def synthetic(nu3s, T, trigger="linf_doubling"):
    spec = SweepSpec((1.0,), (1.0,), tuple(nu3s), **SMALL)
    rows = [SweepRow(1.0, 1.0, n, 1.0, 1.0, 1.0, t, trig, "thm1_inf", 1.0, t, False, 0)
            for n, t, trig in zip(nu3s, T, trigger if isinstance(trigger, list) else [trigger] * len(T))]
    return SweepResult(spec, rows)


class TestFit:
    def test_power_law_slope(self):
        nus = log_spaced(0.01, 1.0, 6)
        fit = fit_scaling_exponent(synthetic(nus, [n**3 for n in nus]), "nu3")
        assert fit.slope == pytest.approx(3.0, abs=1e-9)
        assert fit.r2 == pytest.approx(1.0, abs=1e-12)
        assert fit.censored_count == 0

    def test_censored_rows_are_dropped(self):
        nus = log_spaced(0.01, 1.0, 6)
        trig = ["linf_doubling"] * 5 + ["horizon"]
        fit = fit_scaling_exponent(synthetic(nus, [n for n in nus], trig), "nu3")
        assert fit.censored_count == 1
        assert fit.slope == pytest.approx(1.0, abs=1e-9)

    def test_too_few_rows(self):
        nus = log_spaced(0.1, 1.0, 3)
        with pytest.raises(InsufficientDataError):
            fit_scaling_exponent(synthetic(nus, list(nus)), "nu3")

    def test_theoretical_exponent_thm1_inf(self):
        nus = log_spaced(0.01, 1.0, 4)
        fit = fit_scaling_exponent(synthetic(nus, list(nus)), "nu3")
        assert fit.theoretical == pytest.approx(1.0, rel=1e-12)

    def test_bad_axis(self):
        with pytest.raises(ConfigurationError):
            fit_scaling_exponent(synthetic([1.0] * 4, [1.0] * 4), "nu4")

    def test_envelope(self):
        rep = linf_envelope(synthetic([0.1, 0.2], [0.3, 0.8]))
        assert rep.c == pytest.approx(3.0) and rep.spread == pytest.approx(4 / 3) and rep.rows_used == 2


class TestSweep:
    def test_heat_only_sweep_is_censored(self):
        res = run_sweep(SweepSpec((0.5,), (0.5,), (0.1, 0.5), nonlinear=False, **SMALL))
        assert all(r.trigger == "horizon" for r in res.rows)
        assert nondecreasing([r.effective_T for r in res.rows])

    def test_rows_follow_product_order(self):
        spec = SweepSpec((0.5, 1.0), (0.5,), (0.1, 0.2), **SMALL)
        res = run_sweep(spec)
        assert [(r.nu1, r.nu3) for r in res.rows] == [(0.5, 0.1), (0.5, 0.2), (1.0, 0.1), (1.0, 0.2)]

    def test_duplicate_point_gives_identical_rows(self):
        res = run_sweep(SweepSpec((0.5,), (0.5,), (0.2, 0.2), amplitude=3.0, **SMALL))
        assert res.rows[0] == res.rows[1]

    def test_bound_matches_evaluator(self):
        spec = SweepSpec((0.5,), (0.5,), (0.1, 0.3), amplitude=2.0, **SMALL)
        res = run_sweep(spec)
        for r in res.rows:
            want = evaluate(bound_query(spec, r.nu, {"Linf": r.norm_Linf0})).t_lower
            assert r.bound_value == want

    def test_unordered_viscosities_leave_bound_nan(self):
        res = run_sweep(SweepSpec((0.1,), (0.1,), (0.5,), **SMALL))
        assert math.isnan(res.rows[0].bound_value)

    def test_csv_is_deterministic(self, tmp_path):
        spec = SweepSpec((0.5,), (0.5,), (0.1, 0.3), amplitude=3.0, **SMALL)
        run_sweep(spec).write_csv(tmp_path / "a.csv")
        run_sweep(spec).write_csv(tmp_path / "b.csv")
        a, b = (tmp_path / "a.csv").read_text(), (tmp_path / "b.csv").read_text()
        assert a == b
        header = next(csv.reader(a.splitlines()))
        assert header[:3] == ["nu1", "nu2", "nu3"] and header[-1] == "seed"

    def test_parallel_matches_serial(self):
        spec = SweepSpec((0.5,), (0.5,), (0.1, 0.2, 0.4), amplitude=3.0, **SMALL)
        assert run_sweep(spec, jobs=2).rows == run_sweep(spec, jobs=1).rows

    def test_spec_validation(self):
        with pytest.raises(ConfigurationError):
            SweepSpec((), (1.0,), (1.0,))
        with pytest.raises(ConfigurationError):
            SweepSpec((1.0,), (1.0,), (-1.0,))
        with pytest.raises(ConfigurationError):
            SweepSpec((1.0,), (1.0,), (1.0,), bound="thm1")
        with pytest.raises(ConfigurationError):
            SweepSpec((1.0,), (1.0,), (1.0,), bound="thm4")

    def test_nondecreasing(self):
        assert nondecreasing([0.1, 0.2, math.inf, math.inf])
        assert not nondecreasing([0.2, 0.1])
        assert not nondecreasing([0.1, math.nan])


class TestCovariance:
    def test_identity_scaling(self):
        rep = scaling_covariance_test(taylor_green(Grid3.cube(16)), (0.1, 0.1, 0.1), 0.2, lam=1, steps=4)
        assert rep.max_rel_error == 0.0

    def test_heat_flow(self):
        rep = scaling_covariance_test(taylor_green(Grid3.cube(16)), (0.1, 0.2, 0.3), 0.5, steps=5,
                                      nonlinear=False)
        assert rep.max_rel_error < 1e-12

    def test_nonlinear_small_grid(self):
        rep = scaling_covariance_test(taylor_green(Grid3.cube(16)), (0.1, 0.1, 0.1), 0.2, steps=4)
        assert rep.max_rel_error < 1e-12

    def test_cfl_guard(self):
        with pytest.raises(ConfigurationError):
            scaling_covariance_test(taylor_green(Grid3.cube(16), amplitude=50.0), (0.1, 0.1, 0.1), 1.0,
                                    steps=1)


class TestSmallness:
    def test_heat_products_decrease(self):
        rep = eventual_smallness_probe(taylor_green(Grid3.cube(16)), (0.2, 0.2, 0.2), 1.0, 0.0,
                                       nonlinear=False)
        assert rep.t0 is None
        assert all(b < a for a, b in zip(rep.products, rep.products[1:]))
        assert rep.budget_holds

    def test_threshold_above_initial(self):
        rep = eventual_smallness_probe(taylor_green(Grid3.cube(16)), (0.2, 0.2, 0.2), 1.0, 1e6)
        assert rep.t0 == 0.0 and rep.times == [0.0]

    def test_needs_vertical_viscosity(self):
        with pytest.raises(ConfigurationError):
            eventual_smallness_probe(taylor_green(Grid3.cube(16)), ViscosityTriple(1, 1, 0), 1.0, 1.0)

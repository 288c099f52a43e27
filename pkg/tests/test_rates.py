import math
import warnings

import numpy as np
import pytest

from definetti.errors import InvariantViolation
from definetti.measures import Atomic, Beta, SingularPower, beta_bound_constant
from definetti.rates import (
    RunConfig,
    _warn_if_not_decreasing,
    check_report,
    compare_constant,
    distance_report,
    fit_rate,
    log_grid,
    run_distance_curve,
    smooth_upper_constant,
)
from definetti.verify import run_verification_suite, suite_passed
from definetti.wasserstein import DistanceReport, reports_to_csv

NS = log_grid(100, 100_000, 12)


class TestFitRate:
    @pytest.mark.parametrize("exponent", [-1.0, -0.5, -0.75, -0.6])
    def test_recovers_pure_power_law(self, exponent):
        ns = list(NS)
        fit = fit_rate(ns, [3.7 * n ** exponent for n in ns])
        assert abs(fit.slope - exponent) <= 1e-12
        assert fit.intercept == pytest.approx(math.log(3.7), abs=1e-10)
        assert fit.max_residual <= 1e-12

    @pytest.mark.parametrize(
        "ns,ds",
        [
            ([10, 100, 1000], [1, 1, 1]),
            ([10, 20, 30, 40], [1, 1, 1, 1]),
            ([10, 100, 50, 1000], [1, 1, 1, 1]),
            ([10, 100, 500, 1000], [1, 0, 1, 1]),
            ([10, 100, 500, 1000], [1, -1, 1, 1]),
            ([10, 100, 500, 1000], [1, 1, 1]),
        ],
    )
    def test_rejects(self, ns, ds):
        with pytest.raises(ValueError):
            fit_rate(ns, ds)


def test_log_grid():
    assert NS[0] == 100 and NS[-1] == 100_000 and len(NS) == 12
    with pytest.raises(ValueError):
        log_grid(1, 3, 10)


class TestCompareConstant:
    def test_ratio(self):
        mu = Beta(2, 3)
        c = beta_bound_constant(2, 3)
        assert compare_constant(mu, c) == pytest.approx(1.0, abs=1e-15)
        assert compare_constant(mu, 2 * c) == pytest.approx(0.5, abs=1e-15)

    def test_rejects(self):
        with pytest.raises(ValueError):
            compare_constant(SingularPower(0.5), 1.0)
        with pytest.raises(ValueError):
            compare_constant(Beta(1, 1), 0.0)


class TestDistanceCurve:
    def test_uniform_single_point(self):
        (r,) = run_distance_curve(RunConfig(Beta(1, 1), (1,), mode="exact"))
        assert r.dw_exact == pytest.approx(0.25, abs=1e-12)
        assert r.lower_bound == pytest.approx(1 / 6, abs=1e-15)
        assert r.upper_crude == pytest.approx(0.40825, abs=1e-5)

    def test_beta23_respects_smooth_bound(self):
        reports = run_distance_curve(RunConfig(Beta(2, 3), log_grid(10, 1000, 10), mode="exact"))
        c = beta_bound_constant(2, 3)
        for r in reports:
            assert r.lower_bound <= r.dw_exact <= c / r.n
            assert r.upper_smooth == pytest.approx(c / r.n)

    def test_dirac_perturbed(self):
        reports = run_distance_curve(RunConfig(Atomic(((0.5, 1.0),)), (4, 16, 64), mode="perturbed"))
        for r in reports:
            assert abs(r.dw_perturbed - 1 / math.sqrt(2 * math.pi * r.n)) <= 1e-8

    def test_both_mode_fills_every_field(self):
        (r,) = run_distance_curve(RunConfig(Beta(2, 2), (20,), mode="both"))
        assert None not in (r.dw_exact, r.dk, r.dw_perturbed, r.dual_lower_psi, r.upper_smooth)

    def test_singular_power_has_no_smooth_bound(self):
        assert smooth_upper_constant(SingularPower(0.5)) is None
        (r,) = run_distance_curve(RunConfig(SingularPower(0.5), (10,), mode="exact"))
        assert r.upper_smooth is None

    def test_monte_carlo_mode(self):
        reports = run_distance_curve(RunConfig(Beta(2, 3), (10, 20), mode="urn_mc", seed=5, replications=50_000))
        assert all(r.dw_empirical > 0 and r.dw_exact is None for r in reports)

    def test_results_ordered_and_worker_independent(self):
        grid = (50, 5, 20, 10)
        one = run_distance_curve(RunConfig(SingularPower(0.3), grid, mode="both", workers=1))
        many = run_distance_curve(RunConfig(SingularPower(0.3), grid, mode="both", workers=4))
        assert [r.n for r in one] == sorted(grid)
        assert reports_to_csv(one) == reports_to_csv(many)

    def test_byte_identical_reruns(self):
        cfg = RunConfig(Beta(0.5, 0.5), (3, 30), mode="both")
        assert reports_to_csv(run_distance_curve(cfg)) == reports_to_csv(run_distance_curve(cfg))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            RunConfig(Beta(1, 1), ())
        with pytest.raises(ValueError):
            RunConfig(Beta(1, 1), (1,), mode="fast")


class TestInvariants:
    def fake(self, **kw):
        base = dict(n=10, dw_exact=0.02, dk=0.1, dw_perturbed=None, lower_bound=0.01667,
                    upper_crude=0.129, upper_smooth=None, equivalence_gap_bound=0.0667, dual_lower_psi=0.01667)
        base.update(kw)
        return DistanceReport(**base)

    def test_consistent_report_passes(self):
        check_report(Beta(1, 1), self.fake())

    @pytest.mark.parametrize(
        "kw,name",
        [
            (dict(dw_exact=0.001), "C1/n <= dw_exact"),
            (dict(dw_exact=0.5, dk=0.9), "dw_exact <= sqrt(C1/n)"),
            (dict(dk=0.01), "dw_exact <= dk"),
            (dict(upper_smooth=0.015), "dw_exact <= C2/n"),
            (dict(dw_perturbed=0.2), "|dw_exact - dw_perturbed| <= E[theta^2+(1-theta)^2]/n"),
        ],
    )
    def test_violation_names_inequality(self, kw, name):
        with pytest.raises(InvariantViolation) as info:
            check_report(Beta(1, 1), self.fake(**kw))
        assert info.value.inequality == name
        assert info.value.n == 10
        assert "beta" in info.value.measure

    def test_distance_report_checks_by_default(self):
        r = distance_report(Beta(2, 3), 25, mode="both")
        assert r.dw_perturbed > 0 and r.dw_exact > 0

    def test_soft_monotonicity_warning(self):
        up = [self.fake(n=5, dw_exact=0.01), self.fake(n=10, dw_exact=0.02)]
        with pytest.warns(RuntimeWarning):
            _warn_if_not_decreasing(up, Beta(2, 2))
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            _warn_if_not_decreasing(list(reversed(up)), Beta(2, 2))


class TestVerificationSuite:
    def test_quick_suite_passes(self):
        results = run_verification_suite(quick=True)
        assert {r["status"] for r in results} == {"pass"}, [r for r in results if r["status"] != "pass"]
        assert suite_passed(results)
        for r in results:
            assert set(r) >= {"check_name", "status", "measured", "bound", "margin"}

    def test_loose_tolerance_is_not_a_silent_pass(self):
        from definetti.quadrature import DEFAULT_CONFIG

        results = run_verification_suite(DEFAULT_CONFIG.with_tol(abs_tol=1e-2, rel_tol=1e-2), quick=True)
        statuses = {r["status"] for r in results}
        assert statuses & {"degraded", "fail", "error"}
        assert not suite_passed(results)

    def test_suite_passed_needs_every_pass(self):
        assert suite_passed([{"status": "pass"}])
        assert not suite_passed([{"status": "pass"}, {"status": "degraded"}])

"""End-to-end verification of every bound the library implements.

Each check yields ``{check_name, status, measured, bound, margin}``.
``status`` is ``pass``, ``fail``, ``error`` or ``degraded``; the last
means the inequality held but the configured quadrature tolerance is
coarser than the accuracy the check relies on, so the pass is not
trustworthy.  Only ``pass`` counts as success.
"""

from __future__ import annotations

import math
import traceback

import numpy as np

from .exact_laws import mean_law
from .measures import (
    Atomic,
    Beta,
    Mixture,
    SingularPower,
    beta_bound_constant,
    bound_constants,
    moment_sq_plus_comp_sq,
    moment_theta_one_minus_theta,
)
from .quadrature import DEFAULT_CONFIG
from .rates import fit_rate, log_grid
from .urn import UrnConfig, bootstrap_se, empirical_dw, simulate_urn, total_variation
from .wasserstein import (
    binomial_normal_check,
    dk_mean_vs_prior,
    dual_lower_bound_psi,
    dw_mean_vs_prior,
    dw_perturbed_prior,
)

SANDWICH_MEASURES = (Beta(1, 1), Beta(2, 3), Beta(0.5, 0.5), SingularPower(0.2), SingularPower(0.8))
SANDWICH_NS = (1, 2, 5, 10, 20, 50, 100, 200)


def _entry(name, ok, measured, bound, margin, needed, cfg):
    if not ok:
        status = "fail"
    elif needed is not None and cfg.abs_tol > needed:
        status = "degraded"
    else:
        status = "pass"
    return {"check_name": name, "status": status, "measured": float(measured),
            "bound": float(bound), "margin": float(margin)}


def _guard(name, fn):
    try:
        return fn()
    except Exception as exc:  # reported, never swallowed silently
        return [{"check_name": name, "status": "error", "measured": float("nan"), "bound": float("nan"),
                 "margin": float("nan"), "detail": f"{type(exc).__name__}: {exc}",
                 "trace": traceback.format_exc(limit=3)}]


def check_closed_forms(cfg):
    u = Beta(1, 1)
    out = []
    for n, exact in ((1, 0.25), (2, 5.0 / 36.0)):
        v = dw_mean_vs_prior(mean_law(u, n, cfg), u)
        err = abs(v - exact)
        out.append(_entry(f"uniform_prior_closed_form_n{n}", err <= 1e-12, v, exact, 1e-12 - err, 1e-12, cfg))
    return out


def _sandwich_grid(cfg):
    return [(mu, n, mean_law(mu, n, cfg)) for mu in SANDWICH_MEASURES for n in SANDWICH_NS]


def check_sandwich(cfg, grid):
    worst_lo = worst_hi = math.inf
    for mu, n, law in grid:
        c1 = moment_theta_one_minus_theta(mu, cfg)
        dw = dw_mean_vs_prior(law, mu)
        lo, hi = c1 / n, math.sqrt(c1 / n)
        worst_lo = min(worst_lo, dw - lo)
        worst_hi = min(worst_hi, hi - dw)
    margin = min(worst_lo, worst_hi)
    ok = worst_lo > 0 and worst_hi > 0
    return [_entry("moment_sandwich", ok, margin, 0.0, margin, margin, cfg)]


def check_psi_identity(cfg, grid):
    worst = 0.0
    for mu, n, law in grid:
        v = dual_lower_bound_psi(law, mu)
        worst = max(worst, abs(v - moment_theta_one_minus_theta(mu, cfg) / n))
    return [_entry("quadratic_test_function_identity", worst <= 1e-10, worst, 1e-10, 1e-10 - worst, 1e-10, cfg)]


def check_wasserstein_below_kolmogorov(cfg, grid):
    worst = math.inf
    for mu, n, law in grid:
        worst = min(worst, dk_mean_vs_prior(law, mu) - dw_mean_vs_prior(law, mu))
    return [_entry("wasserstein_below_kolmogorov", worst >= 0, worst, 0.0, worst, None, cfg)]


def check_beta_grid(cfg, quick=False):
    params = np.linspace(0.5, 3.0, 3 if quick else 5)
    ns = (10, 100, 1000) if quick else log_grid(10, 1000, 10)
    worst_bound = math.inf
    worst_const = 0.0
    tightness = 0.0
    for a in params:
        for b in params:
            mu = Beta(float(a), float(b))
            cab = beta_bound_constant(mu.alpha, mu.beta)
            generic = bound_constants(mu, cfg, method="quadrature").c2
            worst_const = max(worst_const, abs(cab - generic))
            for n in ns:
                dw = dw_mean_vs_prior(mean_law(mu, n, cfg), mu)
                worst_bound = min(worst_bound, cab / n - dw)
                tightness = max(tightness, dw * n / cab)
    bound_entry = _entry("beta_smooth_bound", worst_bound > 0, worst_bound, 0.0, worst_bound, worst_bound, cfg)
    # reported only: largest observed n * dw / C over the grid
    bound_entry["tightness_ratio"] = float(tightness)
    return [
        bound_entry,
        _entry("beta_constant_closed_form_vs_quadrature", worst_const <= 1e-8, worst_const, 1e-8,
               1e-8 - worst_const, 1e-8, cfg),
    ]


def check_equivalence(cfg, quick=False):
    worst = math.inf
    ns = (10, 50) if quick else (10, 50, 200)
    for mu in (Beta(2, 2), SingularPower(0.5)):
        for n in ns:
            dw = dw_mean_vs_prior(mean_law(mu, n, cfg), mu)
            pert = dw_perturbed_prior(mu, n, cfg)
            gap = moment_sq_plus_comp_sq(mu, cfg) / n + 1e-8
            worst = min(worst, gap - abs(dw - pert))
    return [_entry("perturbed_prior_equivalence", worst >= 0, worst, 0.0, worst, 1e-8, cfg)]


def check_binomial_normal(cfg):
    worst = math.inf
    for t in np.round(np.arange(1, 10) / 10.0, 10):
        for n in (1, 4, 16, 64, 256):
            lhs, rhs = binomial_normal_check(float(t), n)
            worst = min(worst, rhs - lhs)
    return [_entry("binomial_normal_wasserstein_bound", worst >= 0, worst, 0.0, worst, None, cfg)]


def check_boundary_mass(cfg):
    base = Beta(2, 2)
    worst = 0.0
    for q in (0.25, 0.5):
        mixed = Mixture(((q, Atomic(((0.0, 1.0),))), (1.0 - q, base)))
        for n in (5, 50):
            lhs = dw_mean_vs_prior(mean_law(mixed, n, cfg), mixed)
            rhs = (1.0 - q) * dw_mean_vs_prior(mean_law(base, n, cfg), base)
            worst = max(worst, abs(lhs - rhs))
    return [_entry("boundary_mass_scaling", worst <= 1e-8, worst, 1e-8, 1e-8 - worst, 1e-8, cfg)]


def check_rates(cfg, quick=False):
    out = []
    ns = log_grid(100, 100_000, 6 if quick else 12)
    for gamma in (0.2, 0.5, 0.8):
        d = [dw_perturbed_prior(SingularPower(gamma), n, cfg) for n in ns]
        fit = fit_rate(ns, d)
        target = -(1.0 + gamma) / 2.0
        err = abs(fit.slope - target)
        # a quadrature error near 1e-3 of the smallest distance would move the slope
        out.append(_entry(f"singular_power_rate_gamma_{gamma}", err <= 0.05, fit.slope, target, 0.05 - err,
                          1e-3 * min(d), cfg))
    dirac = Atomic(((0.5, 1.0),))
    worst = 0.0
    dvals = []
    for n in ns:
        v = dw_perturbed_prior(dirac, n, cfg)
        dvals.append(v)
        worst = max(worst, abs(v - 1.0 / math.sqrt(2.0 * math.pi * n)))
    out.append(_entry("point_mass_half_closed_form", worst <= 1e-8, worst, 1e-8, 1e-8 - worst, 1e-8, cfg))
    slope = fit_rate(ns, dvals).slope
    out.append(_entry("point_mass_half_rate", abs(slope + 0.5) <= 1e-8, slope, -0.5, 1e-8 - abs(slope + 0.5), 1e-8, cfg))
    for mu in (Beta(2, 2),) if quick else (Beta(2, 2), Beta(2, 3), Beta(0.5, 0.5)):
        d = [dw_perturbed_prior(mu, n, cfg) for n in ns]
        fit = fit_rate(ns, d)
        err = abs(fit.slope + 1.0)
        out.append(_entry(f"beta_{mu.alpha:g}_{mu.beta:g}_rate", err <= 0.05, fit.slope, -1.0, 0.05 - err,
                          1e-3 * min(d), cfg))
    return out


def check_urn(cfg, seed, quick=False):
    reps = 200_000 if quick else 1_000_000
    emp = simulate_urn(UrnConfig(2, 3, 1, 20, reps, seed))
    mu = Beta(2, 3)
    law = mean_law(mu, 20, cfg)
    tv = total_variation(emp.proportions, law.probs)
    out = [_entry("urn_total_variation", tv <= 0.01, tv, 0.01, 0.01 - tv, None, cfg)]
    dw_emp = empirical_dw(emp, mu)
    dw = dw_mean_vs_prior(law, mu)
    se = bootstrap_se(emp, mu, resamples=50 if quick else 200, seed=seed)
    z = abs(dw_emp - dw) / se
    out.append(_entry("urn_empirical_distance", z <= 3.0, z, 3.0, 3.0 - z, None, cfg))
    return out


def run_verification_suite(quadrature=DEFAULT_CONFIG, seed=0, quick=False):
    """Run every check; returns the list of per-check records."""
    cfg = quadrature
    results = []
    results += _guard("uniform_prior_closed_form", lambda: check_closed_forms(cfg))
    grid_holder = {}

    def grid():
        if "g" not in grid_holder:
            grid_holder["g"] = _sandwich_grid(cfg)
        return grid_holder["g"]

    results += _guard("moment_sandwich", lambda: check_sandwich(cfg, grid()))
    results += _guard("beta_smooth_bound", lambda: check_beta_grid(cfg, quick))
    results += _guard("perturbed_prior_equivalence", lambda: check_equivalence(cfg, quick))
    results += _guard("binomial_normal_wasserstein_bound", lambda: check_binomial_normal(cfg))
    results += _guard("boundary_mass_scaling", lambda: check_boundary_mass(cfg))
    results += _guard("rates", lambda: check_rates(cfg, quick))
    results += _guard("urn", lambda: check_urn(cfg, seed, quick))
    results += _guard("quadratic_test_function_identity", lambda: check_psi_identity(cfg, grid()))
    results += _guard("wasserstein_below_kolmogorov", lambda: check_wasserstein_below_kolmogorov(cfg, grid()))
    return results


def suite_passed(results):
    return all(r["status"] == "pass" for r in results)


__all__ = ["run_verification_suite", "suite_passed"]

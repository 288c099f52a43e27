"""Distance curves over a grid of ``n`` and log-log rate fits."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergentIntegralError, InvariantViolation
from .exact_laws import mean_law
from .measures import (
    Beta,
    bound_constants,
    moment_sq_plus_comp_sq,
    moment_theta_one_minus_theta,
)
from .quadrature import DEFAULT_CONFIG, QuadratureConfig
from .urn import empirical_dw, simulate_exchangeable
from .wasserstein import (
    DistanceReport,
    dk_mean_vs_prior,
    dual_lower_bound_abs,
    dual_lower_bound_psi,
    dw_mean_vs_prior,
    dw_perturbed_prior,
)

MODES = ("exact", "perturbed", "both", "urn_mc")
# slack for inequalities between exactly computed quantities
EXACT_SLACK = 1e-10
# the perturbed distance carries quadrature error on top
PERTURBED_SLACK = 1e-8


@dataclass(frozen=True)
class RateFit:
    ns: tuple
    distances: tuple
    slope: float
    intercept: float
    max_residual: float


@dataclass
class RunConfig:
    measure: object
    n_grid: tuple
    mode: str = "exact"
    quadrature: QuadratureConfig = DEFAULT_CONFIG
    seed: int = 0
    output_path: str = ""
    replications: int = 100_000
    workers: int = 1
    check: bool = True
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not len(self.n_grid):
            raise ValueError("n_grid must be nonempty")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


def log_grid(lo, hi, points):
    """``points`` integers log-spaced between ``lo`` and ``hi`` inclusive."""
    grid = np.unique(np.round(np.geomspace(lo, hi, points)).astype(int))
    if grid.size != points:
        raise ValueError("grid too dense to give distinct integers")
    return tuple(int(v) for v in grid)


def smooth_upper_constant(mu, cfg=DEFAULT_CONFIG):
    """The ``C2`` constant when the measure admits one, else ``None``."""
    if not mu.has_density or mu.kind == "mixture":
        return None
    try:
        return bound_constants(mu, cfg).c2
    except DivergentIntegralError:
        return None


def _require(cond, mu, n, inequality, lhs, rhs):
    if not cond:
        raise InvariantViolation(mu.label(), n, inequality, lhs, rhs)


def distance_report(mu, n, mode="both", cfg=DEFAULT_CONFIG, check=True, c2=None, seed=0,
                    replications=100_000):
    """Every distance and bound for one ``(mu, n)``, invariants asserted."""
    c1 = moment_theta_one_minus_theta(mu, cfg)
    gap = moment_sq_plus_comp_sq(mu, cfg) / n
    dw = dk = psi = pert = emp = None
    if mode in ("exact", "both"):
        law = mean_law(mu, n, cfg)
        dw = dw_mean_vs_prior(law, mu)
        dk = dk_mean_vs_prior(law, mu)
        psi = dual_lower_bound_psi(law, mu)
    if mode in ("perturbed", "both"):
        pert = dw_perturbed_prior(mu, n, cfg)
    if mode == "urn_mc":
        emp = empirical_dw(simulate_exchangeable(mu, n, replications, seed), mu)
    report = DistanceReport(
        n=n, dw_exact=dw, dk=dk, dw_perturbed=pert, lower_bound=c1 / n,
        upper_crude=math.sqrt(c1 / n), upper_smooth=None if c2 is None else c2 / n,
        equivalence_gap_bound=gap, dual_lower_psi=psi, measure=mu.label(), dw_empirical=emp,
    )
    if check:
        check_report(mu, report, cfg)
    return report


def check_report(mu, r, cfg=DEFAULT_CONFIG):
    n = r.n
    if r.dw_exact is not None:
        _require(r.lower_bound <= r.dw_exact + EXACT_SLACK, mu, n, "C1/n <= dw_exact", r.lower_bound, r.dw_exact)
        _require(r.dw_exact <= r.upper_crude + EXACT_SLACK, mu, n, "dw_exact <= sqrt(C1/n)", r.dw_exact, r.upper_crude)
        _require(r.dw_exact <= r.dk + EXACT_SLACK, mu, n, "dw_exact <= dk", r.dw_exact, r.dk)
        _require(r.dual_lower_psi <= r.dw_exact + EXACT_SLACK, mu, n, "dual_psi <= dw_exact", r.dual_lower_psi, r.dw_exact)
        if r.upper_smooth is not None:
            _require(r.dw_exact <= r.upper_smooth + EXACT_SLACK, mu, n, "dw_exact <= C2/n", r.dw_exact, r.upper_smooth)
    if r.dw_perturbed is not None:
        if r.dw_exact is not None:
            diff = abs(r.dw_exact - r.dw_perturbed)
            _require(diff <= r.equivalence_gap_bound + PERTURBED_SLACK, mu, n,
                     "|dw_exact - dw_perturbed| <= E[theta^2+(1-theta)^2]/n", diff, r.equivalence_gap_bound)
        if mu.endpoint_mass() == 0.0:
            lb = dual_lower_bound_abs(mu, n, cfg)
            _require(lb <= r.dw_perturbed + PERTURBED_SLACK, mu, n, "dual_abs <= dw_perturbed", lb, r.dw_perturbed)


def run_distance_curve(cfg: RunConfig):
    """One report per ``n``, ordered by ``n`` whatever the worker count."""
    mu = cfg.measure
    c2 = smooth_upper_constant(mu, cfg.quadrature) if cfg.mode in ("exact", "both") else None
    ns = sorted(int(n) for n in cfg.n_grid)

    def one(n):
        return distance_report(mu, n, cfg.mode, cfg.quadrature, cfg.check, c2, cfg.seed + n, cfg.replications)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            reports = list(pool.map(one, ns))
    else:
        reports = [one(n) for n in ns]
    _warn_if_not_decreasing(reports, mu)
    return reports


def _warn_if_not_decreasing(reports, mu):
    """Soft check: exact distances are expected to fall with ``n``."""
    dws = [r.dw_exact for r in reports if r.dw_exact is not None]
    if any(b > a + EXACT_SLACK for a, b in zip(dws, dws[1:])):
        warnings.warn(f"dw_exact is not nonincreasing in n for {mu.label()}", RuntimeWarning, stacklevel=3)


def fit_rate(ns, distances):
    """Least-squares line through ``(ln n, ln d)``."""
    ns = np.asarray(ns, dtype=float)
    d = np.asarray(distances, dtype=float)
    if ns.size != d.size:
        raise ValueError("ns and distances differ in length")
    if ns.size < 4:
        raise ValueError("need at least 4 points")
    if np.any(np.diff(ns) <= 0):
        raise ValueError("ns must be strictly increasing")
    if ns[-1] < 10.0 * ns[0]:
        raise ValueError("grid must span at least one decade")
    if np.any(~(d > 0)) or not np.all(np.isfinite(d)):
        raise ValueError("distances must be positive and finite")
    x, y = np.log(ns), np.log(d)
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - (slope * x + intercept)
    return RateFit(
        ns=tuple(int(v) for v in ns), distances=tuple(float(v) for v in d),
        slope=float(slope), intercept=float(intercept), max_residual=float(np.max(np.abs(resid))),
    )


def compare_constant(mu_beta, external_constant):
    """``C_{alpha,beta}`` divided by a user-supplied constant."""
    if not isinstance(mu_beta, Beta):
        raise ValueError("comparison is defined for Beta measures only")
    if not (external_constant > 0 and math.isfinite(external_constant)):
        raise ValueError("external constant must be positive and finite")
    return bound_constants(mu_beta).c_alpha_beta / external_constant

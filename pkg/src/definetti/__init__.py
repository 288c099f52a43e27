"""Exact laws and Wasserstein rates for exchangeable 0/1 sequences."""

from .errors import ConvergenceError, DivergentIntegralError, InvariantViolation, QuadratureError
from .exact_laws import ExactMeanLaw, mean_law, mean_law_cdf
from .measures import (
    Atomic,
    Beta,
    BoundConstants,
    Mixture,
    SingularPower,
    SmoothDensity,
    beta_abs_linear_mean,
    beta_bound_constant,
    bound_constants,
    kill_boundary,
    measure_from_json,
    moment_sq_plus_comp_sq,
    moment_theta_one_minus_theta,
)
from .quadrature import Accuracy, QuadratureConfig
from .rates import RateFit, RunConfig, compare_constant, fit_rate, run_distance_curve
from .urn import EmpiricalLaw, UrnConfig, empirical_dw, simulate_exchangeable, simulate_urn
from .verify import run_verification_suite
from .wasserstein import (
    DistanceReport,
    binomial_normal_check,
    dk_mean_vs_prior,
    dual_lower_bound_abs,
    dual_lower_bound_psi,
    dw_mean_vs_prior,
    dw_perturbed_prior,
)

__version__ = "0.1.0"

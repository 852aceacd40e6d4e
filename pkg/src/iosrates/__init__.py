"""Induced order statistics: extraction, distance rates and downstream procedures."""

__version__ = "0.1.0"

from .dgp import (ConditionalLaw, Dataset, DgpSpec, ball_law, conditional_law, get_spec,
                  make_cubic_support, make_gaussian_boundary, make_gaussian_interior,
                  make_holder_twopoint, make_log_correction, make_null_twopoint, registry,
                  sample)
from .dist import (DistanceEstimate, hellinger, joint_distance_bound, joint_distance_exact,
                   local_expansion_check, marginal_distance, tensorize_hellinger,
                   total_variation)
from .estimators import InducedOrderStatistics, IOSRegressor, RDDBalanceTest
from .ios import IosResult, extract, extract_two_sided
from .knn import (EstimatorReport, cdf_estimator, mean_estimator, normality_diagnostic,
                  quantile_estimator)
from .ordstat import RadiusLaw, r_order_density, radius_law, uniform_order_moment
from .rates import (RateFit, fhr_comparison, growth_threshold_study, joint_rate_fit,
                    log_correction_profile, marginal_rate_fit)
from .rdd import PermTestResult, cvm_statistic, permutation_test, q_rule, size_power_simulation

__all__ = [
    "ConditionalLaw", "Dataset", "DgpSpec", "ball_law", "conditional_law", "get_spec",
    "make_cubic_support", "make_gaussian_boundary", "make_gaussian_interior",
    "make_holder_twopoint", "make_log_correction", "make_null_twopoint", "registry", "sample",
    "DistanceEstimate", "hellinger", "joint_distance_bound", "joint_distance_exact",
    "local_expansion_check", "marginal_distance", "tensorize_hellinger", "total_variation",
    "InducedOrderStatistics", "IOSRegressor", "RDDBalanceTest",
    "IosResult", "extract", "extract_two_sided",
    "EstimatorReport", "cdf_estimator", "mean_estimator", "normality_diagnostic",
    "quantile_estimator",
    "RadiusLaw", "r_order_density", "radius_law", "uniform_order_moment",
    "RateFit", "fhr_comparison", "growth_threshold_study", "joint_rate_fit",
    "log_correction_profile", "marginal_rate_fit",
    "PermTestResult", "cvm_statistic", "permutation_test", "q_rule", "size_power_simulation",
]

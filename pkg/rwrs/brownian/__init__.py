from rwrs.brownian.estimators import (
    MomentReport,
    ScalingRow,
    delta_endpoint_samples,
    exponent_fit,
    gram_inverse_sqrt_moment,
    inverse_distance_moment_vk,
    inverse_distance_moments_vk,
    l2_inverse_moment,
    l2_norm_sq_samples,
    scaling_law_ratios,
    simulate_delta_endpoint,
    vk_distance,
)
from rwrs.brownian.gram import GramSample, distance_to_span, gram_det, gram_recursion_residuals
from rwrs.brownian.local_time import LocalTimeGrid, l2_norm, sample_local_time_grid

__all__ = [
    "MomentReport",
    "ScalingRow",
    "delta_endpoint_samples",
    "exponent_fit",
    "gram_inverse_sqrt_moment",
    "inverse_distance_moment_vk",
    "inverse_distance_moments_vk",
    "l2_inverse_moment",
    "l2_norm_sq_samples",
    "scaling_law_ratios",
    "simulate_delta_endpoint",
    "vk_distance",
    "GramSample",
    "distance_to_span",
    "gram_det",
    "gram_recursion_residuals",
    "LocalTimeGrid",
    "l2_norm",
    "sample_local_time_grid",
]

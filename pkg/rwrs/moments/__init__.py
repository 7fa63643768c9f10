from rwrs.moments.engine import (
    CarlemanSeries,
    MomentEstimate,
    SandwichBounds,
    carleman_partial,
    envelope_carleman,
    ks_local_time_moment,
    lower_sandwich_growth,
    moment_lower_envelope,
    moment_sandwich,
    moment_upper_envelope,
    rate_exponent,
)
from rwrs.moments.simplex import (
    GAMMA_QUARTER,
    SimplexEstimate,
    beta_recursion_residuals,
    simplex_closed_form,
    simplex_integral_mc,
)

__all__ = [
    "CarlemanSeries",
    "MomentEstimate",
    "SandwichBounds",
    "carleman_partial",
    "envelope_carleman",
    "ks_local_time_moment",
    "lower_sandwich_growth",
    "moment_lower_envelope",
    "moment_sandwich",
    "moment_upper_envelope",
    "rate_exponent",
    "GAMMA_QUARTER",
    "SimplexEstimate",
    "beta_recursion_residuals",
    "simplex_closed_form",
    "simplex_integral_mc",
]

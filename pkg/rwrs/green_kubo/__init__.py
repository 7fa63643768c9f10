from rwrs.green_kubo.blocks import (
    BlockTerm,
    GreenKuboResult,
    block_lags,
    block_term,
    fit_tail,
    horizon_stability,
    merge_order,
    paired_lag_sum,
    sigma2_0a,
    sigma2_f,
    sigma2_from_a_coefficients,
    two_point_observable,
)

__all__ = [
    "BlockTerm",
    "GreenKuboResult",
    "block_lags",
    "block_term",
    "fit_tail",
    "horizon_stability",
    "merge_order",
    "paired_lag_sum",
    "sigma2_0a",
    "sigma2_f",
    "sigma2_from_a_coefficients",
    "two_point_observable",
]

from rwrs.oracle.coefficients import A_coefficient, A_coefficient_exact
from rwrs.oracle.exact import (
    DEFAULT_CAP,
    ExactPmf,
    exact_joint_law,
    exact_joint_prob,
    exact_Z_pmf,
    lag_covariance,
    naive_joint_law,
    oracle_cap,
    scaled_joint_sup,
    total_variation,
)

__all__ = [
    "A_coefficient",
    "A_coefficient_exact",
    "DEFAULT_CAP",
    "ExactPmf",
    "exact_joint_law",
    "exact_joint_prob",
    "exact_Z_pmf",
    "lag_covariance",
    "naive_joint_law",
    "oracle_cap",
    "scaled_joint_sup",
    "total_variation",
]

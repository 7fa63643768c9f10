from fractions import Fraction
from typing import Mapping, Union

from rwrs.lattice.model import ModelConfig
from rwrs.oracle.exact import exact_Z_pmf, observable_weights


def A_coefficient_exact(
    model: ModelConfig, f: Mapping[int, float], k: int, lag: int, cap: Union[int, None] = None
):
    """``sum_{a in k alpha + dZ} sum_b f(a) f(b) P(Z_lag = b - a)``.

    Only the residue class of ``k`` modulo ``d`` matters.
    """
    weights = observable_weights(f)
    if not weights:
        return Fraction(0)
    pmf = exact_Z_pmf(model, abs(lag), cap)
    total = Fraction(0)
    for a, fa in weights.items():
        if not model.admissible(k, a):
            continue
        for b, fb in weights.items():
            total += fa * fb * pmf.mass(b - a)
    return total


def A_coefficient(
    model: ModelConfig, f: Mapping[int, float], k: int, lag: int, cap: Union[int, None] = None
) -> float:
    return float(A_coefficient_exact(model, f, k, lag, cap))

from fractions import Fraction

import pytest

from rwrs.lattice.model import rademacher_model, skewed_scenery_model
from rwrs.oracle.coefficients import A_coefficient, A_coefficient_exact
from rwrs.oracle.exact import lag_covariance


@pytest.mark.parametrize(
    "k, lag, expected",
    [(0, 0, Fraction(1)), (0, 1, Fraction(-1, 2)), (1, 0, Fraction(1)), (1, 1, Fraction(-1, 2))],
)
def test_two_point_coefficients(k, lag, expected):
    assert A_coefficient_exact(rademacher_model(), {0: 1, 1: -1}, k, lag) == expected


def test_zero_observable():
    assert A_coefficient_exact(rademacher_model(), {}, 0, 3) == 0
    assert A_coefficient(rademacher_model(), {0: 0}, 0, 3) == 0.0


def test_only_the_residue_of_k_matters():
    model = skewed_scenery_model()
    f = {0: 1, 1: -2, 2: 1}
    assert A_coefficient_exact(model, f, 1, 3) == A_coefficient_exact(model, f, 5, 3)


@pytest.mark.parametrize("model_factory", [rademacher_model, skewed_scenery_model])
@pytest.mark.parametrize("lag", [0, 1, 2, 5])
def test_residues_sum_to_lag_covariance(model_factory, lag):
    model = model_factory()
    f = {0: 1, 1: -1, 3: 2}
    total = sum(A_coefficient_exact(model, f, k, lag) for k in range(model.periodicity.d))
    assert total == lag_covariance(model, f, lag)

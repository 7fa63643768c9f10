from fractions import Fraction

import numpy as np
import pytest

from rwrs.errors import InvalidPmf, NotCentered, SupportDoesNotGenerateZ
from rwrs.lattice.model import (
    LatticePmf,
    derive_periodicity,
    lazy_scenery_model,
    model_from_triples,
    rademacher_model,
    skewed_scenery_model,
    validate_model,
)


@pytest.mark.parametrize(
    "model, sigma_xi_sq, d, alpha",
    [
        (rademacher_model(), 1.0, 2, 1),
        (lazy_scenery_model(), 2 / 3, 1, 0),
        # support {1, -3}: differences generate 4Z
        (skewed_scenery_model(), 3.0, 4, 1),
    ],
)
def test_derived_quantities(model, sigma_xi_sq, d, alpha):
    assert model.sigma_xi_sq == pytest.approx(sigma_xi_sq)
    assert model.periodicity.d == d
    assert model.periodicity.alpha == alpha


def test_alpha0_inverts_alpha():
    periodicity = skewed_scenery_model().periodicity
    assert (periodicity.alpha * periodicity.alpha0) % periodicity.d == 1


def test_uniform_scenery_has_period_one():
    scenery = LatticePmf.from_triples([(-1, 1, 3), (0, 1, 3), (1, 1, 3)])
    assert derive_periodicity(scenery).d == 1


@pytest.mark.parametrize(
    "step, scenery, error",
    [
        # steps {+-2} do not generate Z
        ([(-2, 1, 2), (2, 1, 2)], [(-1, 1, 2), (1, 1, 2)], SupportDoesNotGenerateZ),
        ([(0, 1, 2), (1, 1, 2)], [(-1, 1, 2), (1, 1, 2)], NotCentered),
        ([(-1, 1, 2), (1, 1, 3)], [(-1, 1, 2), (1, 1, 2)], InvalidPmf),
        ([(-1, 1, 2), (1, 1, 2)], [(1, 1, 0)], InvalidPmf),
        ([(-1, 1, 2), (-1, 1, 2)], [(-1, 1, 2), (1, 1, 2)], InvalidPmf),
    ],
)
def test_invalid_models(step, scenery, error):
    with pytest.raises(error):
        model_from_triples(step, scenery)


def test_errors_are_value_errors():
    with pytest.raises(ValueError):
        model_from_triples([(-2, 1, 2), (2, 1, 2)], [(-1, 1, 2), (1, 1, 2)])


def test_float_masses_within_tolerance():
    step = LatticePmf.from_mapping({-1: 0.5, 1: 0.5})
    scenery = LatticePmf.from_mapping({-1: 0.25, 1: 0.25, 0: 0.5})
    model = validate_model(step, scenery)
    assert not model.is_rational
    assert model.sigma_xi_sq == pytest.approx(0.5)


def test_atoms_are_sorted_and_exact():
    pmf = LatticePmf.from_triples([(1, 1, 2), (-1, 1, 2)])
    assert pmf.support == (-1, 1)
    assert pmf.masses == (Fraction(1, 2), Fraction(1, 2))
    assert pmf.is_symmetric
    assert pmf.to_triples() == [[-1, 1, 2], [1, 1, 2]]


@pytest.mark.parametrize(
    "k, a, expected",
    [(1, 1, True), (1, 0, False), (2, 0, True), (2, -2, True), (3, -1, True), (3, 2, False)],
)
def test_admissible_levels(k, a, expected):
    assert rademacher_model().admissible(k, a) is expected


def test_sample_stays_on_support():
    pmf = skewed_scenery_model().scenery
    draws = pmf.sample(np.random.default_rng(0), 1000)
    assert set(np.unique(draws)) <= {-3, 1}


def test_echo_is_exact():
    echo = skewed_scenery_model().echo()
    assert echo["scenery"] == [[-3, 1, 4], [1, 3, 4]]
    assert echo["periodicity"]["d"] == 4

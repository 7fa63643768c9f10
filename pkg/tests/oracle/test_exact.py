from fractions import Fraction

import pytest

from rwrs.errors import CapExceeded, NonRationalModel
from rwrs.lattice.model import (
    LatticePmf,
    lazy_scenery_model,
    rademacher_model,
    skewed_scenery_model,
    validate_model,
)
from rwrs.oracle.exact import (
    exact_joint_law,
    exact_joint_prob,
    exact_Z_pmf,
    lag_covariance,
    naive_joint_law,
    scaled_joint_sup,
    total_variation,
)
from rwrs.walks.batch import sample_levels

F = Fraction


@pytest.fixture
def model():
    return rademacher_model()


@pytest.mark.parametrize(
    "k, expected",
    [
        (0, {0: F(1)}),
        (1, {-1: F(1, 2), 1: F(1, 2)}),
        # S_1 never returns to 0, so the two scenery values are independent
        (2, {-2: F(1, 4), 0: F(1, 2), 2: F(1, 4)}),
        (3, {-3: F(3, 16), -1: F(5, 16), 1: F(5, 16), 3: F(3, 16)}),
    ],
)
def test_small_pmfs(model, k, expected):
    assert exact_Z_pmf(model, k).atoms == expected


def test_joint_probability(model):
    assert exact_joint_prob(model, [1, 2], [1, 0]) == F(1, 4)
    assert exact_joint_prob(model, [1], [0]) == 0


def test_joint_probability_needs_matching_lengths(model):
    with pytest.raises(ValueError):
        exact_joint_prob(model, [1, 2], [1])


@pytest.mark.parametrize("model_factory", [rademacher_model, lazy_scenery_model, skewed_scenery_model])
@pytest.mark.parametrize("k", [1, 4, 7])
def test_total_mass_is_one(model_factory, k):
    assert exact_Z_pmf(model_factory(), k).total() == 1


@pytest.mark.parametrize("times", [(2, 5), (1, 3, 6), (4, 4)])
def test_marginals_of_joint_law(model, times):
    law = exact_joint_law(model, times)
    for index, t in enumerate(times):
        marginal = {}
        for point, mass in law.items():
            marginal[point[index]] = marginal.get(point[index], 0) + mass
        assert marginal == exact_Z_pmf(model, t).atoms


@pytest.mark.parametrize(
    "model_factory, symmetric",
    [(rademacher_model, True), (lazy_scenery_model, True), (skewed_scenery_model, False)],
)
def test_symmetry(model_factory, symmetric):
    assert exact_Z_pmf(model_factory(), 5).is_symmetric() is symmetric


@pytest.mark.parametrize("model_factory", [rademacher_model, skewed_scenery_model])
@pytest.mark.parametrize("times", [(1,), (3,), (2, 6), (8,), (3, 5, 8)])
def test_grouped_law_matches_path_enumeration(model_factory, times):
    model = model_factory()
    assert exact_joint_law(model, times) == naive_joint_law(model, times)


def test_congruence_of_support():
    model = skewed_scenery_model()
    for k in range(1, 7):
        assert all(model.admissible(k, a) for a in exact_Z_pmf(model, k).support)


def test_cap_exceeded(model):
    with pytest.raises(CapExceeded):
        exact_Z_pmf(model, 11, cap=10)


def test_cap_from_environment(model, monkeypatch):
    monkeypatch.setenv("RWRS_ORACLE_CAP", "5")
    with pytest.raises(CapExceeded):
        exact_Z_pmf(model, 6)


def test_descending_times_are_rejected(model):
    with pytest.raises(ValueError):
        exact_joint_law(model, (3, 2))


def test_float_model_is_not_rational():
    model = validate_model(
        LatticePmf.from_mapping({-1: 0.5, 1: 0.5}), LatticePmf.from_mapping({-1: 0.5, 1: 0.5})
    )
    with pytest.raises(NonRationalModel):
        exact_Z_pmf(model, 2)


def test_rows_are_exact(model):
    rows = exact_Z_pmf(model, 2).to_rows()
    assert rows[1] == {"value": 0, "numerator": 1, "denominator": 2}


def test_lag_covariance(model):
    f = {0: 1, 1: -1}
    assert lag_covariance(model, f, 0) == 2
    assert lag_covariance(model, f, 1) == -1
    assert lag_covariance(model, f, 2) == 1
    assert lag_covariance(model, f, 3) == F(-5, 8)
    assert lag_covariance(model, f, -3) == lag_covariance(model, f, 3)


def test_total_variation(model):
    pmf = exact_Z_pmf(model, 2)
    assert total_variation({-2: 1, 0: 2, 2: 1}, pmf) == 0.0
    assert total_variation([0, 0, 0, 0], pmf) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        total_variation({}, pmf)


@pytest.mark.parametrize("model_factory", [rademacher_model, lazy_scenery_model, skewed_scenery_model])
def test_simulated_levels_match_the_exact_law(model_factory):
    model = model_factory()
    times = [1, 2, 3, 4]
    levels = sample_levels(model, 4, 20000, times=times, seed=12, experiment="tests/oracle_mc")
    for column, k in enumerate(times):
        assert total_variation(levels[:, column], exact_Z_pmf(model, k)) <= 0.03


@pytest.mark.parametrize("gaps, expected", [([1], 0.5), ([1, 1], 0.25)])
def test_scaled_joint_sup_small_gaps(gaps, expected):
    assert scaled_joint_sup(rademacher_model(), gaps) == pytest.approx(expected)


@pytest.mark.parametrize("order", [1, 2, 3])
def test_scaled_joint_sup_stays_bounded(order):
    values = [scaled_joint_sup(rademacher_model(), [gap] * order, cap=12) for gap in range(1, 12 // order + 1)]
    assert max(values) <= 2.0


def test_scaled_joint_sup_rejects_zero_gaps():
    with pytest.raises(ValueError):
        scaled_joint_sup(rademacher_model(), [0, 2])

from fractions import Fraction

import numpy as np
import pytest

from rwrs.errors import ObservableNotCentered
from rwrs.green_kubo.blocks import (
    BlockTerm,
    block_lags,
    block_term,
    covariance_kernel,
    fit_tail,
    merge_order,
    paired_lag_sum,
    sigma2_0a,
    sigma2_f,
    sigma2_from_a_coefficients,
    two_point_observable,
)
from rwrs.lattice.model import rademacher_model, skewed_scenery_model


@pytest.fixture
def model():
    return rademacher_model()


def test_merge_order():
    assert list(merge_order(2)) == [0, -1, 1, -2, 2]


@pytest.mark.parametrize("k, expected", [(0, [0, 1]), (-1, [2, 1]), (1, [2, 3]), (-2, [4, 3])])
def test_block_lags(model, k, expected):
    assert block_lags(model, k) == expected


@pytest.mark.parametrize("k, expected", [(0, "1/1"), (-1, "0/1"), (1, "3/8")])
def test_first_blocks_are_exact(model, k, expected):
    block = block_term(model, two_point_observable(1), k)
    assert block.source == "exact"
    assert block.exact_value == expected


def test_partial_sum_over_first_blocks(model):
    result = sigma2_f(model, two_point_observable(1), exact_horizon=1)
    assert result.sigma2 == pytest.approx(11 / 8, abs=1e-15)
    assert [b.k for b in result.blocks] == [0, -1, 1]
    assert result.stderr == 0.0


def test_sigma2_0a_is_the_two_point_observable(model):
    direct = sigma2_f(model, {0: 1, 2: -1}, exact_horizon=2)
    shortcut = sigma2_0a(model, a=2, exact_horizon=2)
    assert shortcut.sigma2 == direct.sigma2
    assert [b.exact_value for b in shortcut.blocks] == [b.exact_value for b in direct.blocks]


def test_non_centered_observable_raises(model):
    with pytest.raises(ObservableNotCentered):
        sigma2_f(model, {0: 1.0})


def test_non_centered_observable_can_warn(model, caplog):
    result = sigma2_f(model, {0: 1}, exact_horizon=1, enforce_centered=False)
    assert not result.centered
    assert "diverges" in caplog.text


@pytest.mark.parametrize("model_factory", [rademacher_model, skewed_scenery_model])
@pytest.mark.parametrize("horizon", [0, 3, 6])
def test_a_coefficient_route_equals_paired_lag_sum(model_factory, horizon):
    model = model_factory()
    f = {0: 1, 1: -2, 2: 1}
    assert sigma2_from_a_coefficients(model, f, horizon) == paired_lag_sum(model, f, horizon)


def test_blocks_sum_to_paired_lags(model):
    # blocks 0, -1 and 1 cover lags 0..3 with lags 1 and 2 twice and lag 3 once
    f = two_point_observable(1)
    result = sigma2_f(model, f, exact_horizon=1)
    expected = paired_lag_sum(model, f, 2) + Fraction(-5, 8)
    assert result.sigma2 == float(expected)


def test_covariance_kernel():
    assert covariance_kernel({0: 1, 1: -1}) == {0: 2.0, -1: -1.0, 1: -1.0}


def test_monte_carlo_blocks_past_the_cap(model):
    result = sigma2_f(model, two_point_observable(1), exact_horizon=1, mc_horizon=3, mc_budget=4000, seed=3, cap=4)
    sources = {b.k: b.source for b in result.blocks}
    assert sources[0] == "exact" and sources[1] == "exact"
    assert sources[3] == "mc" and sources[-3] == "mc"
    assert result.stderr > 0
    for block in result.blocks:
        if block.source == "mc":
            assert abs(block.value - block_term(model, two_point_observable(1), block.k).value) <= 5 * block.stderr + 1e-9


def test_mc_blocks_are_reproducible(model):
    options = dict(exact_horizon=0, mc_horizon=2, mc_budget=500, seed=9, cap=0)
    first = sigma2_f(model, two_point_observable(1), **options)
    second = sigma2_f(model, two_point_observable(1), workers=2, **options)
    assert first.sigma2 == second.sigma2


def _blocks(pairs):
    blocks = []
    for k, value in pairs:
        blocks.append(BlockTerm(k=k, value=value, source="exact", lags=[]))
    return blocks


def test_fit_tail_recovers_power_law():
    pairs = [(0, 1.0)]
    for size in range(1, 41):
        pairs += [(-size, 0.0), (size, 2.0 * size ** -2.0)]
    tail = fit_tail(_blocks(pairs), 40)
    assert tail["tail_exponent"] == pytest.approx(2.0)
    assert tail["tail_constant"] == pytest.approx(2.0)
    assert tail["tail_estimate"] == pytest.approx(sum(2.0 * k ** -2.0 for k in range(41, 200000)), rel=1e-3)


def test_fit_tail_without_enough_points():
    tail = fit_tail(_blocks([(0, 1.0), (-1, 0.0), (1, 0.0)]), 1)
    assert np.isnan(tail["tail_estimate"])


def test_fit_tail_not_summable(caplog):
    pairs = [(0, 1.0)]
    for size in range(1, 31):
        pairs += [(-size, 0.0), (size, 1.0 / size ** 0.5)]
    assert fit_tail(_blocks(pairs), 30)["tail_estimate"] == float("inf")

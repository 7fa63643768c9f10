import math
from types import SimpleNamespace

import numpy as np
import pytest

from rwrs.brownian.estimators import l2_inverse_moment
from rwrs.brownian.gram import gram_det
from rwrs.brownian.local_time import sample_grids
from rwrs.errors import DegenerateInput, InvalidBudget, MissingComponents
from rwrs.moments import engine
from rwrs.moments.engine import (
    carleman_partial,
    envelope_carleman,
    gaussian_scale,
    ks_local_time_moment,
    lower_sandwich_growth,
    moment_lower_envelope,
    moment_sandwich,
    moment_upper_envelope,
    rate_exponent,
    sandwich_table,
    weighted_inverse_sqrt_det,
)
from rwrs.moments.simplex import simplex_closed_form


def test_sandwich_collapses_for_one_time():
    bounds = moment_sandwich(1, 1.0, 1.2, inverse_norm_stderr=0.01)
    assert bounds.lower == bounds.upper
    assert bounds.lower == pytest.approx(1.2 * 4 / math.sqrt(2 * math.pi))
    assert not bounds.upper_is_proxy


def test_sandwich_orders_bounds():
    bounds = moment_sandwich(3, 1.0, 1.0, {1: 1.5, 2: 2.5})
    assert bounds.lower <= bounds.upper
    assert bounds.upper == pytest.approx(1.0 * 1.5 * 2.5 * simplex_closed_form(3) * gaussian_scale(3, 1.0))
    assert bounds.upper_is_proxy


def test_sandwich_needs_every_component():
    with pytest.raises(MissingComponents):
        moment_sandwich(3, 1.0, 1.0, {1: 1.5})
    with pytest.raises(MissingComponents):
        moment_sandwich(1, 1.0, None)


def test_contains_uses_inflated_errors():
    bounds = moment_sandwich(2, 1.0, 1.0, {1: 2.0})
    assert bounds.contains((bounds.lower + bounds.upper) / 2)
    assert not bounds.contains(bounds.upper * 2, stderr=0.0)
    assert bounds.contains(bounds.upper + 0.25, stderr=0.1, inflation=3.0)


def test_sandwich_table():
    table = sandwich_table([1, 2], 1.0, 1.0, {1: 2.0})
    assert sorted(table) == [1, 2]


@pytest.mark.parametrize("c", [0.5, 1.0, 3.0])
def test_rate_exponent_of_lower_envelope(c):
    ms = list(range(2, 30))
    assert rate_exponent(ms, [moment_lower_envelope(m, c) for m in ms]) == pytest.approx(0.75)


def test_lower_sandwich_growth():
    _, growth = lower_sandwich_growth(range(2, 7), 1.0, 1.0)
    assert 0.4 <= growth <= 1.0


def test_upper_envelope_values():
    assert moment_upper_envelope(1, a=2.0, eta0=0.0) == pytest.approx(2.0 / math.gamma(1.25))


def test_carleman_single_term():
    series = carleman_partial([4.0])
    assert series.total == 0.5
    assert series.companion_sums == [1.0]


def test_carleman_empty():
    series = carleman_partial([])
    assert series.total == 0.0
    assert series.partial_sums == []


def test_carleman_log_scale_matches_plain():
    values = [2.0, 5.0, 30.0]
    plain = carleman_partial(values)
    logged = carleman_partial(np.log(values), log_scale=True)
    assert np.allclose(plain.partial_sums, logged.partial_sums)


def test_carleman_rejects_non_positive_values():
    with pytest.raises(ValueError):
        carleman_partial([1.0, 0.0])


def test_envelope_partial_sums_diverge_slowly():
    series = envelope_carleman(2000, a=1.0, eta0=0.01)
    growth = series.growth_exponent(start=200)
    assert 0.3 <= growth <= 0.5
    assert series.partial_sums == sorted(series.partial_sums)


def test_ks_moment_budgets():
    with pytest.raises(InvalidBudget):
        ks_local_time_moment(2, simplex_budget=0)
    with pytest.raises(InvalidBudget):
        ks_local_time_moment(2, path_budget=0)


def test_ks_moment_scales_with_sigma():
    unit = ks_local_time_moment(2, 1.0, simplex_budget=20, n_disc=256, seed=4)
    scaled = ks_local_time_moment(2, 2.0, simplex_budget=20, n_disc=256, seed=4)
    assert scaled.value == pytest.approx(unit.value / 4)
    assert scaled.det_moment == unit.det_moment


def test_first_moment_agrees_with_inverse_norm():
    estimate = ks_local_time_moment(1, 1.0, simplex_budget=600, n_disc=1024, seed=5)
    inverse = l2_inverse_moment(1024, 600, seed=6)
    target = 4 * inverse.estimate / math.sqrt(2 * math.pi)
    spread = math.hypot(estimate.stderr, 4 * inverse.stderr / math.sqrt(2 * math.pi))
    assert abs(estimate.value - target) <= max(5 * spread, 0.15 * target)


def test_resolved_gaps_use_the_gram_determinant():
    times, gaps = np.array([0.25, 0.75]), np.array([0.25, 0.5])
    value, rescaled = weighted_inverse_sqrt_det(times, gaps, 1024, np.random.default_rng(0))
    sample = gram_det(sample_grids(1024, times, np.random.default_rng(0)))
    assert rescaled == 0
    assert value == pytest.approx(sample.det ** -0.5 * np.prod(gaps ** 0.75))


def test_gaps_below_the_grid_are_rescaled():
    times, gaps = np.array([1e-6, 2e-6]), np.array([1e-6, 1e-6])
    value, rescaled = weighted_inverse_sqrt_det(times, gaps, 1024, np.random.default_rng(1))
    rng = np.random.default_rng(1)
    expected = 1.0
    for _ in range(2):
        expected /= np.sqrt(sample_grids(1024, [1.0], rng)[0].l2_norm_sq())
    assert rescaled == 2
    assert value == pytest.approx(expected)


def test_mixed_gaps_keep_only_the_resolved_times():
    times, gaps = np.array([1e-6, 0.5]), np.array([1e-6, 0.5 - 1e-6])
    value, rescaled = weighted_inverse_sqrt_det(times, gaps, 1024, np.random.default_rng(2))
    assert rescaled == 1
    assert np.isfinite(value) and value > 0


def test_short_gaps_are_counted_not_dropped():
    estimate = ks_local_time_moment(3, 1.0, simplex_budget=50, n_disc=256, seed=7)
    assert estimate.rescaled > 0
    assert estimate.excluded_fraction <= 0.01
    assert estimate.samples == 50 - estimate.excluded


def test_too_many_degenerate_draws_raise(monkeypatch):
    monkeypatch.setattr(engine, "gram_det", lambda grids: SimpleNamespace(det=0.0))
    with pytest.raises(DegenerateInput):
        ks_local_time_moment(2, 1.0, simplex_budget=40, n_disc=4096, seed=8)

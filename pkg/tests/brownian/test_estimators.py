import numpy as np
import pytest

from rwrs.brownian.estimators import (
    delta_endpoint_samples,
    delta_from_grid,
    exponent_fit,
    gram_inverse_sqrt_moment,
    inverse_distance_moments_vk,
    l2_inverse_moment,
    median_of_means,
    moment_report,
    scaling_law_ratios,
    vk_distance,
)
from rwrs.brownian.local_time import l2_norm, sample_local_time_grid
from rwrs.errors import InvalidBudget
from rwrs.walks.streams import StreamId


@pytest.fixture
def grid():
    return sample_local_time_grid(4096, [1.0], StreamId(seed=21, experiment="tests/estimators"))[0]


def test_budget_of_one():
    report = l2_inverse_moment(256, 1, seed=0)
    assert report.n_samples == 1
    assert report.stderr == 0.0


def test_zero_budget_is_rejected():
    with pytest.raises(InvalidBudget):
        l2_inverse_moment(256, 0, seed=0)


def test_l2_inverse_moment_is_plausible():
    # E|L_1|^2 = 8 / (3 sqrt(2 pi)), about 1.06
    report = l2_inverse_moment(1024, 400, seed=1)
    assert 0.6 < report.estimate < 2.0
    assert report.excluded == 0


def test_vk_zero_is_norm(grid):
    assert vk_distance(grid, 0) == l2_norm(grid)


@pytest.mark.parametrize("k", [2, 4, 8, 16])
def test_vk_subspaces_are_nested(grid, k):
    assert vk_distance(grid, 2 * k) <= vk_distance(grid, k) + 1e-12


def test_vk_distance_never_exceeds_norm(grid):
    for k in (1, 3, 5):
        assert vk_distance(grid, k) <= l2_norm(grid) + 1e-12


def test_negative_k_is_rejected(grid):
    with pytest.raises(ValueError):
        vk_distance(grid, -1)


def test_inverse_distance_moments_grow_with_k():
    reports = inverse_distance_moments_vk([2, 8, 32], 2048, 50, seed=2)
    estimates = [r.estimate for r in reports]
    assert estimates == sorted(estimates)
    assert [r.k for r in reports] == [2, 8, 32]


def test_degenerate_samples_are_excluded(caplog):
    report = moment_report("inverse", np.array([1.0, np.inf, 3.0]), 16, 0)
    assert report.excluded == 1
    assert report.n_samples == 2
    assert report.estimate == 2.0
    assert "excluded 1" in caplog.text


def test_median_of_means():
    assert median_of_means(np.array([1.0, 1.0, 100.0, 3.0, 3.0, 3.0]), 3) == 3.0


def test_exponent_fit():
    ks = [4, 8, 16, 32]
    assert exponent_fit(ks, [k ** 0.5 for k in ks]) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        exponent_fit([4], [2.0])


def test_delta_conditional_variance(grid):
    rng = np.random.default_rng(5)
    _, variance = delta_from_grid(grid, rng, spatial_truncation=3)
    assert variance == grid.l2_norm_sq()


def test_delta_matches_its_conditional_variance():
    deltas, variances = delta_endpoint_samples(512, 2000, seed=4)
    squares = deltas ** 2
    stderr = np.std(squares, ddof=1) / np.sqrt(len(squares))
    assert abs(np.mean(squares) - np.mean(variances)) <= 4 * stderr


def test_gram_inverse_sqrt_moment_runs():
    report = gram_inverse_sqrt_moment([0.5, 1.0], 512, 20, seed=6)
    assert report.n_samples + report.excluded == 20
    assert report.estimate > 0


def test_scaling_law():
    rows = scaling_law_ratios([0.25, 0.5], 4096, 400, seed=9)
    assert [row.u for row in rows] == [0.25, 0.5]
    for row in rows:
        assert abs(row.ratio - 1) <= max(4 * row.stderr, 0.05)


def test_scaling_law_rejects_times_past_one():
    with pytest.raises(ValueError):
        scaling_law_ratios([1.5], 256, 10, seed=0)


def test_l2_inverse_moment_is_stable_across_discretisations():
    coarse = l2_inverse_moment(1 << 14, 300, seed=10)
    fine = l2_inverse_moment(1 << 16, 300, seed=11)
    spread = np.hypot(coarse.stderr, fine.stderr)
    assert abs(coarse.estimate - fine.estimate) <= 4 * spread + 0.03 * fine.estimate

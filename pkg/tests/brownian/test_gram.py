import numpy as np
import pytest

from rwrs.brownian.gram import distance_to_span, gram_det, gram_recursion_residuals, profile_matrix
from rwrs.brownian.local_time import grids_from_positions, sample_local_time_grid
from rwrs.errors import DegenerateInput
from rwrs.walks.streams import StreamId


def _grids(times, replicate=0, n_disc=2048):
    return sample_local_time_grid(n_disc, times, StreamId(seed=17, experiment="tests/gram", replicate=replicate))


def test_single_profile_determinant_is_squared_norm():
    grid = _grids([1.0])[0]
    assert gram_det([grid]).det == pytest.approx(grid.l2_norm_sq())


def test_duplicate_time_gives_zero_determinant():
    sample = gram_det(_grids([0.5, 0.5, 1.0]))
    assert sample.det == 0.0
    assert sample.clamped >= 1


@pytest.mark.parametrize("replicate", range(5))
def test_recursion_identity(replicate):
    residuals = gram_recursion_residuals(_grids([0.2, 0.4, 0.6, 0.8, 1.0], replicate))
    residuals = residuals[np.isfinite(residuals)]
    assert np.all(residuals <= 1e-8)


@pytest.mark.parametrize("replicate", range(3))
def test_gram_matrix_is_psd(replicate):
    assert gram_det(_grids([0.3, 0.7, 1.0], replicate)).is_psd()


def test_fewer_sites_than_profiles_gives_zero_determinant():
    # the third profile is twice the second
    grids = grids_from_positions(np.array([0, 1, 0, 1, 1, 1, 0, 0]), 4, [0.25, 0.5, 1.0])
    sample = gram_det(grids)
    assert sample.det == 0.0
    assert len(sample.distances) == 3
    assert sample.distances[-1] == 0.0
    assert sample.clamped == 1


def test_sample_times_are_effective_times():
    sample = gram_det(_grids([1 / 3, 1.0], n_disc=1000))
    assert sample.times == [0.333, 1.0]


def test_cauchy_schwarz():
    sample = gram_det(_grids([0.5, 1.0]))
    matrix = sample.matrix
    assert matrix[0, 1] ** 2 <= matrix[0, 0] * matrix[1, 1] * (1 + 1e-12)
    assert sample.det >= 0


def test_distance_to_empty_span_is_norm():
    grid = _grids([1.0])[0]
    assert distance_to_span(grid, []) == pytest.approx(np.sqrt(grid.l2_norm_sq()))


def test_mixed_spacings_are_rejected():
    coarse = _grids([1.0], n_disc=256)[0]
    fine = _grids([1.0], n_disc=1024)[0]
    with pytest.raises(DegenerateInput):
        profile_matrix([coarse, fine])


def test_empty_input_is_rejected():
    with pytest.raises(DegenerateInput):
        gram_det([])

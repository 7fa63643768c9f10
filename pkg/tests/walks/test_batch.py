import numpy as np
import pytest

from rwrs.errors import IoFailure, UnknownStatistic, ZeroReps
from rwrs.lattice.model import rademacher_model
from rwrs.walks.batch import StatisticSpec, batch_estimate, sample_levels, sample_statistic


@pytest.fixture
def model():
    return rademacher_model()


def test_indicator_of_zero_after_one_step_is_never_hit(model):
    estimate = batch_estimate(model, 1, 300, StatisticSpec(name="indicator", level=0), seed=1)
    assert estimate.estimate == 0.0
    assert estimate.stderr == 0.0


def test_indicator_at_n_zero_is_always_hit(model):
    samples = sample_statistic(model, 0, 50, StatisticSpec(name="indicator", level=0), seed=1)
    assert np.all(samples == 1.0)


@pytest.mark.parametrize("name", ["local_time_zero", "lln_sum", "clt_sum", "endpoint"])
def test_scaled_statistics_need_positive_n(model, name):
    with pytest.raises(ValueError):
        sample_statistic(model, 0, 10, name, seed=1)


def test_zero_reps_is_rejected(model):
    with pytest.raises(ZeroReps):
        batch_estimate(model, 10, 0, "endpoint", seed=1)


def test_unknown_statistic(model):
    with pytest.raises(UnknownStatistic):
        batch_estimate(model, 10, 5, "max_level", seed=1)


def test_results_do_not_depend_on_workers(model):
    single = sample_statistic(model, 64, 600, "lln_sum", seed=5, workers=1)
    pooled = sample_statistic(model, 64, 600, "lln_sum", seed=5, workers=4)
    assert np.array_equal(single, pooled)


def test_replicates_are_independent_of_reps(model):
    short = sample_statistic(model, 32, 100, "endpoint", seed=5)
    long = sample_statistic(model, 32, 400, "endpoint", seed=5)
    assert np.array_equal(short, long[:100])


def test_endpoint_statistic_matches_levels(model):
    endpoint = sample_statistic(model, 16, 40, "endpoint", seed=3, experiment="shared")
    levels = sample_levels(model, 16, 40, seed=3, experiment="shared")
    assert np.allclose(endpoint, 16 ** -0.75 * levels[:, 0])


def test_sample_levels_shape_and_congruence(model):
    times = [1, 2, 3, 10]
    levels = sample_levels(model, 10, 25, times=times, seed=2)
    assert levels.shape == (25, 4)
    assert np.all((levels - np.array(times)) % 2 == 0)


def test_local_time_zero_is_plausible(model):
    estimate = batch_estimate(model, 1024, 400, "local_time_zero", seed=11)
    # limit 4 E|L_1|^{-1} / sqrt(2 pi), roughly 1.6
    assert 0.8 < estimate.estimate < 2.6
    assert estimate.reps == 400


def test_batch_row_and_raw_dump(model, tmp_path):
    estimate = batch_estimate(model, 8, 20, "endpoint", seed=4, keep_samples=True)
    assert set(estimate.to_row()) == {"statistic", "n", "reps", "estimate", "stderr", "seed"}
    path = estimate.dump_samples(tmp_path / "endpoint.f64")
    assert np.array_equal(np.fromfile(path, dtype="<f8"), estimate.samples)
    assert "samples" not in estimate.model_dump()


def test_raw_dump_failure_is_io_failure(model, tmp_path):
    estimate = batch_estimate(model, 8, 5, "endpoint", seed=4, keep_samples=True)
    with pytest.raises(IoFailure):
        estimate.dump_samples(tmp_path / "missing" / "endpoint.f64")

import numpy as np
import pytest

from rwrs.walks.parallel import map_replicates, replicate_chunks, summarize
from rwrs.walks.streams import StreamId, experiment_key, generator, replicate_generator


def _draws(seed, start, stop):
    return np.array([replicate_generator(seed, "tests/chunks", r).random() for r in range(start, stop)])


def test_same_stream_same_draws():
    first = generator(StreamId(seed=1, experiment="a", replicate=2)).integers(0, 1 << 30, 8)
    second = generator(StreamId(seed=1, experiment="a", replicate=2)).integers(0, 1 << 30, 8)
    assert np.array_equal(first, second)


def test_streams_differ_by_every_field():
    base = StreamId(seed=1, experiment="a", replicate=2)
    variants = [
        base.model_copy(update={"seed": 2}),
        base.model_copy(update={"experiment": "b"}),
        base.model_copy(update={"replicate": 3}),
    ]
    reference = generator(base).random(4)
    for stream in variants:
        assert not np.array_equal(reference, generator(stream).random(4))


def test_experiment_key_is_stable():
    assert experiment_key("batch") == experiment_key("batch")
    assert experiment_key("batch") != experiment_key("levels")


def test_chunks_cover_replicates_in_order():
    chunks = replicate_chunks(600, 256)
    assert chunks == [(0, 256), (256, 512), (512, 600)]
    assert replicate_chunks(0) == []


def test_map_replicates_is_independent_of_workers():
    inline = map_replicates(_draws, (9,), 700, workers=1, chunk_size=100)
    pooled = map_replicates(_draws, (9,), 700, workers=3, chunk_size=100)
    assert np.array_equal(inline, pooled)
    assert np.array_equal(inline, _draws(9, 0, 700))


def test_summarize():
    mean, variance, stderr = summarize(np.array([1.0, 2.0, 3.0, 4.0]))
    assert mean == 2.5
    assert variance == pytest.approx(5 / 3)
    assert stderr == pytest.approx(np.sqrt(5 / 12))


def test_summarize_single_sample():
    assert summarize(np.array([5.0])) == (5.0, 0.0, 0.0)

import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Callable, List, Tuple

import numpy as np
from tqdm import tqdm

logger = logging.getLogger(__name__)

CHUNK_SIZE = 256


def replicate_chunks(reps: int, chunk_size: int = CHUNK_SIZE) -> List[Tuple[int, int]]:
    """Fixed ``[start, stop)`` replicate ranges; they never depend on the worker count."""
    return [(start, min(start + chunk_size, reps)) for start in range(0, reps, chunk_size)]


def map_replicates(
    chunk_fn: Callable[..., np.ndarray],
    args: tuple,
    reps: int,
    workers: int = 1,
    chunk_size: int = CHUNK_SIZE,
    desc: str = "replicates",
    progress: bool = False,
) -> np.ndarray:
    """Run ``chunk_fn(*args, start, stop)`` over every chunk and stack the results.

    ``chunk_fn`` must be a module-level function returning one row per
    replicate. Rows come back in replicate order whatever the completion
    order of the chunks was.
    """
    chunks = replicate_chunks(reps, chunk_size)
    results = [None] * len(chunks)
    bar = tqdm(total=len(chunks), desc=desc, disable=not progress)
    if workers <= 1 or len(chunks) <= 1:
        for index, (start, stop) in enumerate(chunks):
            results[index] = chunk_fn(*args, start, stop)
            bar.update(1)
    else:
        logger.debug("Running %d chunks of %s on %d workers", len(chunks), desc, workers)
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = {
                executor.submit(chunk_fn, *args, start, stop): index
                for index, (start, stop) in enumerate(chunks)
            }
            for future in as_completed(futures):
                results[futures[future]] = future.result()
                bar.update(1)
    bar.close()
    if not results:
        return np.zeros(0)
    return np.concatenate(results, axis=0)


def summarize(samples: np.ndarray) -> Tuple[float, float, float]:
    """Mean, unbiased variance and standard error by pairwise summation."""
    samples = np.asarray(samples, dtype=np.float64)
    count = len(samples)
    mean = float(np.sum(samples) / count)
    if count < 2:
        return mean, 0.0, 0.0
    variance = float(np.sum((samples - mean) ** 2) / (count - 1))
    return mean, variance, float(np.sqrt(variance / count))

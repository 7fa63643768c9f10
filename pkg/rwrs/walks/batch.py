import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from rwrs.errors import IoFailure, UnknownStatistic, ZeroReps
from rwrs.lattice.model import ModelConfig
from rwrs.walks.engine import check_steps, evaluate_observable, simulate_trajectory
from rwrs.walks.parallel import map_replicates, summarize
from rwrs.walks.streams import StreamId, generator

logger = logging.getLogger(__name__)


class StatisticSpec(BaseModel):
    """A registered functional of ``Z_0, ..., Z_n``.

    ``observable`` is used by the sum statistics, ``level`` by ``indicator``.
    """

    model_config = ConfigDict(frozen=True)

    name: str
    observable: Dict[int, float] = Field(default_factory=lambda: {0: 1.0})
    level: int = 0


def _local_time_zero(z: np.ndarray, n: int, spec: StatisticSpec) -> float:
    return n ** -0.25 * float(np.count_nonzero(z[1:] == 0))


def _lln_sum(z: np.ndarray, n: int, spec: StatisticSpec) -> float:
    return n ** -0.25 * float(np.sum(evaluate_observable(spec.observable, z[:n])))


def _clt_sum(z: np.ndarray, n: int, spec: StatisticSpec) -> float:
    return n ** -0.125 * float(np.sum(evaluate_observable(spec.observable, z[:n])))


def _endpoint(z: np.ndarray, n: int, spec: StatisticSpec) -> float:
    return n ** -0.75 * float(z[n])


def _indicator(z: np.ndarray, n: int, spec: StatisticSpec) -> float:
    return float(z[n] == spec.level)


STATISTICS: Dict[str, Callable[[np.ndarray, int, StatisticSpec], float]] = {
    "local_time_zero": _local_time_zero,
    "lln_sum": _lln_sum,
    "clt_sum": _clt_sum,
    "endpoint": _endpoint,
    "indicator": _indicator,
}

# the scaled statistics divide by a power of n
NEEDS_POSITIVE_N = {"local_time_zero", "lln_sum", "clt_sum", "endpoint"}


def resolve_statistic(statistic) -> StatisticSpec:
    spec = statistic if isinstance(statistic, StatisticSpec) else StatisticSpec(name=str(statistic))
    if spec.name not in STATISTICS:
        raise UnknownStatistic(
            f"Unknown statistic {spec.name!r}; expected one of {sorted(STATISTICS)}"
        )
    return spec


class BatchEstimate(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    statistic: str
    n: int
    reps: int
    estimate: float
    variance: float
    stderr: float
    seed: int
    experiment: str = "batch"
    samples: Optional[np.ndarray] = Field(default=None, exclude=True)

    def to_row(self) -> dict:
        return {
            "statistic": self.statistic,
            "n": self.n,
            "reps": self.reps,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "seed": self.seed,
        }

    def dump_samples(self, path: Path) -> Path:
        """Write the raw samples as little-endian float64."""
        if self.samples is None:
            raise ValueError("Samples were not kept; rerun with keep_samples=True")
        try:
            np.asarray(self.samples, dtype="<f8").tofile(path)
        except OSError as e:
            raise IoFailure(f"Could not write raw samples to {path}: {e}") from e
        return Path(path)


def _statistic_chunk(
    model: ModelConfig, n: int, spec: StatisticSpec, seed: int, experiment: str, start: int, stop: int
) -> np.ndarray:
    fn = STATISTICS[spec.name]
    out = np.empty(stop - start, dtype=np.float64)
    for offset, replicate in enumerate(range(start, stop)):
        stream = StreamId(seed=seed, experiment=experiment, replicate=replicate)
        traj = simulate_trajectory(model, n, generator(stream), stream)
        out[offset] = fn(traj.z, n, spec)
    return out


def sample_statistic(
    model: ModelConfig,
    n: int,
    reps: int,
    statistic,
    seed: int,
    experiment: str = "batch",
    workers: int = 1,
    progress: bool = False,
) -> np.ndarray:
    """One value of ``statistic`` per replicate, in replicate order."""
    spec = resolve_statistic(statistic)
    if reps < 1:
        raise ZeroReps("At least one replicate is required")
    check_steps(model, n)
    if n == 0 and spec.name in NEEDS_POSITIVE_N:
        raise ValueError(f"Statistic {spec.name!r} needs n >= 1")
    return map_replicates(
        _statistic_chunk,
        (model, n, spec, seed, experiment),
        reps,
        workers=workers,
        desc=f"{experiment}:{spec.name}",
        progress=progress,
    )


def _levels_chunk(
    model: ModelConfig, times: np.ndarray, seed: int, experiment: str, start: int, stop: int
) -> np.ndarray:
    n = int(times.max())
    out = np.empty((stop - start, len(times)), dtype=np.int64)
    for offset, replicate in enumerate(range(start, stop)):
        stream = StreamId(seed=seed, experiment=experiment, replicate=replicate)
        traj = simulate_trajectory(model, n, generator(stream), stream)
        out[offset] = traj.z[times]
    return out


def sample_levels(
    model: ModelConfig,
    n: int,
    reps: int,
    times: Optional[Sequence[int]] = None,
    seed: int = 0,
    experiment: str = "levels",
    workers: int = 1,
    progress: bool = False,
) -> np.ndarray:
    """``(reps, len(times))`` matrix of ``Z_t``; ``times`` defaults to ``[n]``."""
    if reps < 1:
        raise ZeroReps("At least one replicate is required")
    times = np.asarray([n] if times is None else list(times), dtype=np.int64)
    if len(times) == 0 or times.min() < 0:
        raise ValueError("times must be a nonempty list of non-negative indices")
    check_steps(model, int(times.max()))
    return map_replicates(
        _levels_chunk,
        (model, times, seed, experiment),
        reps,
        workers=workers,
        desc=f"{experiment}:levels",
        progress=progress,
    )


def batch_estimate(
    model: ModelConfig,
    n: int,
    reps: int,
    statistic,
    seed: int,
    workers: int = 1,
    experiment: str = "batch",
    keep_samples: bool = False,
    progress: bool = False,
) -> BatchEstimate:
    samples = sample_statistic(
        model, n, reps, statistic, seed, experiment=experiment, workers=workers, progress=progress
    )
    spec = resolve_statistic(statistic)
    estimate, variance, stderr = summarize(samples)
    logger.info("%s n=%d reps=%d: %.6g +- %.2g", spec.name, n, reps, estimate, stderr)
    return BatchEstimate(
        statistic=spec.name,
        n=n,
        reps=reps,
        estimate=estimate,
        variance=variance,
        stderr=stderr,
        seed=seed,
        experiment=experiment,
        samples=samples if keep_samples else None,
    )


def batch_rows(estimates: List[BatchEstimate]) -> List[dict]:
    return [estimate.to_row() for estimate in estimates]

"""Monte Carlo functionals of discretised Brownian local time.

Each replicate is one simple-walk path drawn from its own stream
``(seed, experiment, replicate)``. Samples whose functional is degenerate on
the grid (a zero distance or a zero determinant) are excluded and counted.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from rwrs.brownian.gram import gram_det
from rwrs.brownian.local_time import LocalTimeGrid, l2_norm, sample_grids
from rwrs.errors import InvalidBudget
from rwrs.walks.parallel import map_replicates, summarize
from rwrs.walks.streams import StreamId, generator

logger = logging.getLogger(__name__)

DEGENERATE_TOLERANCE = 1e-14


class MomentReport(BaseModel):
    name: str
    estimate: float
    stderr: float
    n_samples: int = Field(description="Samples that entered the mean.")
    excluded: int = Field(default=0, description="Degenerate samples left out.")
    median_of_means: Optional[float] = None
    mom_groups: int = 0
    n_disc: int
    seed: int
    k: Optional[int] = None

    def to_row(self) -> dict:
        return self.model_dump()


def _check_budget(budget: int) -> None:
    if budget < 1:
        raise InvalidBudget(f"Budget must be at least 1, got {budget}")


def _rng(seed: int, experiment: str, replicate: int) -> np.random.Generator:
    return generator(StreamId(seed=seed, experiment=experiment, replicate=replicate))


def median_of_means(samples: np.ndarray, groups: int) -> float:
    groups = max(1, min(groups, len(samples)))
    means = [float(np.sum(chunk) / len(chunk)) for chunk in np.array_split(samples, groups)]
    return float(np.median(means))


def moment_report(
    name: str,
    samples: np.ndarray,
    n_disc: int,
    seed: int,
    mom_groups: int = 10,
    k: Optional[int] = None,
) -> MomentReport:
    """Summarise samples; non-finite entries mark degenerate samples."""
    samples = np.asarray(samples, dtype=np.float64)
    finite = samples[np.isfinite(samples)]
    excluded = len(samples) - len(finite)
    if excluded:
        logger.warning("%s: excluded %d degenerate samples of %d", name, excluded, len(samples))
    if len(finite) == 0:
        return MomentReport(
            name=name, estimate=float("nan"), stderr=float("nan"), n_samples=0,
            excluded=excluded, n_disc=n_disc, seed=seed, k=k,
        )
    estimate, _, stderr = summarize(finite)
    return MomentReport(
        name=name,
        estimate=estimate,
        stderr=stderr,
        n_samples=len(finite),
        excluded=excluded,
        median_of_means=median_of_means(finite, mom_groups),
        mom_groups=max(1, min(mom_groups, len(finite))),
        n_disc=n_disc,
        seed=seed,
        k=k,
    )


def _l2_norm_chunk(n_disc: int, times: Tuple[float, ...], seed: int, experiment: str, start: int, stop: int) -> np.ndarray:
    out = np.empty((stop - start, len(times)))
    for offset, replicate in enumerate(range(start, stop)):
        grids = sample_grids(n_disc, times, _rng(seed, experiment, replicate))
        out[offset] = [g.l2_norm_sq() for g in grids]
    return out


def l2_norm_sq_samples(
    n_disc: int,
    times: Sequence[float],
    budget: int,
    seed: int,
    experiment: str = "brownian/l2_norm",
    workers: int = 1,
) -> np.ndarray:
    """``(budget, len(times))`` samples of ``|L_t|^2``."""
    _check_budget(budget)
    return map_replicates(
        _l2_norm_chunk, (n_disc, tuple(times), seed, experiment), budget, workers=workers, desc=experiment
    )


def l2_inverse_moment(
    n_disc: int,
    budget: int,
    seed: int,
    experiment: str = "brownian/l2_inverse",
    workers: int = 1,
    mom_groups: int = 10,
) -> MomentReport:
    """``E[|L_1|^{-1}]`` with plain and median-of-means estimates."""
    norms_sq = l2_norm_sq_samples(n_disc, [1.0], budget, seed, experiment, workers)[:, 0]
    return moment_report("l2_inverse", norms_sq ** -0.5, n_disc, seed, mom_groups)


class ScalingRow(BaseModel):
    u: float
    ratio: float = Field(description="E|L_u|^2 / (u^{3/2} E|L_1|^2) from the same paths.")
    stderr: float


def scaling_law_ratios(
    us: Sequence[float],
    n_disc: int,
    budget: int,
    seed: int,
    experiment: str = "brownian/scaling",
    workers: int = 1,
) -> List[ScalingRow]:
    """Check ``E|L_u|^2 = u^{3/2} E|L_1|^2``; every ratio should be close to 1.

    Each u is taken at its grid time ``floor(u * n_disc) / n_disc``. The
    stderr linearises the ratio of means over paths.
    """
    if not us or any(not 0 < u <= 1 for u in us):
        raise ValueError(f"Scaling times must lie in (0, 1], got {list(us)}")
    times = sorted({float(u) for u in us} | {1.0})
    samples = l2_norm_sq_samples(n_disc, times, budget, seed, experiment, workers)
    unit = samples[:, -1]
    unit_mean = float(np.mean(unit))
    rows = []
    for column, u in enumerate(times[:-1]):
        effective = np.floor(u * n_disc) / n_disc
        scaled = samples[:, column] / effective ** 1.5
        ratio = float(np.mean(scaled)) / unit_mean
        stderr = float(np.std(scaled - ratio * unit, ddof=1) / np.sqrt(budget) / unit_mean) if budget > 1 else 0.0
        rows.append(ScalingRow(u=u, ratio=ratio, stderr=stderr))
    return rows


def _cell_layout(grid: LocalTimeGrid, k: int):
    """Cell index of every grid site touching ``[-floor(k/2)/k, ceil(k/2)/k)``.

    Returns the sites, their cell index (``-1`` outside the cells) and the
    number of grid sites in each cell.
    """
    first, last = -(k // 2), -(-k // 2) - 1
    h = grid.spacing
    lo = int(np.floor(first / k / h)) - 1
    hi = int(np.ceil((last + 1) / k / h)) + 1
    sites = np.arange(min(lo, grid.origin), max(hi, grid.origin + len(grid.values)), dtype=np.int64)
    cells = np.floor(sites * h * k).astype(np.int64)
    inside = (cells >= first) & (cells <= last)
    index = np.where(inside, cells - first, -1)
    sizes = np.bincount(index[inside], minlength=k)
    return sites, index, sizes


def vk_distance(grid: LocalTimeGrid, k: int) -> float:
    """``L^2`` distance from the profile to ``V_k``.

    ``V_k`` is spanned by the indicators of ``[m/k, (m+1)/k)``,
    ``m = -floor(k/2), ..., ceil(k/2) - 1``. Inside the cells the projection
    is the cell mean over every grid site of the cell, visited or not; all
    mass outside the cells counts in full. ``k = 0`` gives ``|L|``.
    """
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    if k == 0:
        return l2_norm(grid)
    sites, index, sizes = _cell_layout(grid, k)
    values = np.zeros(len(sites))
    offset = grid.origin - int(sites[0])
    values[offset:offset + len(grid.values)] = grid.values
    inside = index >= 0
    sums = np.bincount(index[inside], weights=values[inside], minlength=k)
    means = np.divide(sums, sizes, out=np.zeros(k), where=sizes > 0)
    residual = values.copy()
    residual[inside] -= means[index[inside]]
    return float(np.sqrt(np.sum(residual ** 2) * grid.spacing))


def _vk_chunk(n_disc: int, ks: Tuple[int, ...], seed: int, experiment: str, start: int, stop: int) -> np.ndarray:
    out = np.empty((stop - start, len(ks)))
    for offset, replicate in enumerate(range(start, stop)):
        grid = sample_grids(n_disc, [1.0], _rng(seed, experiment, replicate))[0]
        norm = l2_norm(grid)
        for column, k in enumerate(ks):
            distance = vk_distance(grid, k)
            out[offset, column] = np.inf if distance <= DEGENERATE_TOLERANCE * norm else 1.0 / distance
    return out


def inverse_distance_moments_vk(
    ks: Sequence[int],
    n_disc: int,
    budget: int,
    seed: int,
    experiment: str = "brownian/vk",
    workers: int = 1,
) -> List[MomentReport]:
    """``E[d(L_1, V_k)^{-1}]`` for every ``k``, all from the same paths."""
    _check_budget(budget)
    ks = tuple(int(k) for k in ks)
    if any(k < 1 for k in ks):
        raise ValueError(f"k must be at least 1, got {ks}")
    samples = map_replicates(_vk_chunk, (n_disc, ks, seed, experiment), budget, workers=workers, desc=experiment)
    return [
        moment_report("inverse_distance_vk", samples[:, column], n_disc, seed, k=k)
        for column, k in enumerate(ks)
    ]


def inverse_distance_moment_vk(
    k: int, n_disc: int, budget: int, seed: int, experiment: str = "brownian/vk", workers: int = 1
) -> MomentReport:
    return inverse_distance_moments_vk([k], n_disc, budget, seed, experiment, workers)[0]


def exponent_fit(ks: Sequence[int], estimates: Sequence[float]) -> float:
    """Least-squares slope of ``log estimate`` against ``log k``."""
    if len(ks) < 2:
        raise ValueError("Need at least two points for an exponent fit")
    slope, _ = np.polyfit(np.log(np.asarray(ks, dtype=float)), np.log(np.asarray(estimates, dtype=float)), 1)
    return float(slope)


def delta_from_grid(grid: LocalTimeGrid, rng: np.random.Generator, spatial_truncation: int = 0) -> Tuple[float, float]:
    """``Delta_1 ~ sum_x L_1(x) sqrt(h) g_x`` and its conditional variance ``|L_1|^2``.

    Normals are drawn for every site of ``[-T, T]``, widened to cover the
    walk range.
    """
    lo = min(-spatial_truncation, grid.origin)
    hi = max(spatial_truncation, grid.origin + len(grid.values) - 1)
    if lo < -spatial_truncation or hi > spatial_truncation:
        logger.debug("Spatial truncation %d widened to [%d, %d]", spatial_truncation, lo, hi)
    gaussians = rng.standard_normal(hi - lo + 1)
    start = grid.origin - lo
    weights = gaussians[start:start + len(grid.values)]
    delta = float(np.sum(grid.values * weights) * np.sqrt(grid.spacing))
    return delta, grid.l2_norm_sq()


def simulate_delta_endpoint(n_disc: int, spatial_truncation: int, stream: StreamId) -> float:
    rng = generator(stream)
    grid = sample_grids(n_disc, [1.0], rng)[0]
    return delta_from_grid(grid, rng, spatial_truncation)[0]


def _delta_chunk(n_disc: int, spatial_truncation: int, seed: int, experiment: str, start: int, stop: int) -> np.ndarray:
    out = np.empty((stop - start, 2))
    for offset, replicate in enumerate(range(start, stop)):
        rng = _rng(seed, experiment, replicate)
        grid = sample_grids(n_disc, [1.0], rng)[0]
        out[offset] = delta_from_grid(grid, rng, spatial_truncation)
    return out


def delta_endpoint_samples(
    n_disc: int,
    reps: int,
    seed: int,
    spatial_truncation: int = 0,
    experiment: str = "brownian/delta",
    workers: int = 1,
) -> Tuple[np.ndarray, np.ndarray]:
    """Samples of ``Delta_1`` and their conditional variances ``|L_1|^2``."""
    _check_budget(reps)
    out = map_replicates(
        _delta_chunk, (n_disc, spatial_truncation, seed, experiment), reps, workers=workers, desc=experiment
    )
    return out[:, 0], out[:, 1]


def _gram_chunk(n_disc: int, times: Tuple[float, ...], seed: int, experiment: str, start: int, stop: int) -> np.ndarray:
    out = np.empty(stop - start)
    for offset, replicate in enumerate(range(start, stop)):
        sample = gram_det(sample_grids(n_disc, times, _rng(seed, experiment, replicate)))
        out[offset] = np.inf if sample.det <= 0 else sample.det ** -0.5
    return out


def gram_inverse_sqrt_moment(
    times: Sequence[float],
    n_disc: int,
    budget: int,
    seed: int,
    experiment: str = "brownian/gram",
    workers: int = 1,
) -> MomentReport:
    """``E[det D_{t_1..t_m}^{-1/2}]`` at fixed times."""
    _check_budget(budget)
    samples = map_replicates(
        _gram_chunk, (n_disc, tuple(times), seed, experiment), budget, workers=workers, desc=experiment
    )
    return moment_report("gram_inverse_sqrt", samples, n_disc, seed)

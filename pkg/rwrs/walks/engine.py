import logging
from typing import Dict, Mapping, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from rwrs.errors import ZOverflow
from rwrs.lattice.model import ModelConfig
from rwrs.walks.streams import StreamId, generator

logger = logging.getLogger(__name__)

INT64_LIMIT = 1 << 63


class WalkLocalTimeProfile(BaseModel):
    """Visit counts ``N_n(y)`` of ``S_0, ..., S_{n-1}``."""

    model_config = ConfigDict(frozen=True)

    counts: Dict[int, int] = Field(default_factory=dict)
    n: int
    final_position: int = Field(description="S_n, the position after n steps.")


class RwrsTrajectory(BaseModel):
    """``Z_0, ..., Z_n`` together with the walk and the scenery it saw.

    ``sites``/``site_values`` hold every scenery value sampled for this
    trajectory, sorted by site.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    z: np.ndarray
    positions: np.ndarray = Field(description="S_0, ..., S_{n-1}.")
    sites: np.ndarray
    site_values: np.ndarray
    model: ModelConfig
    stream: StreamId

    @property
    def n(self) -> int:
        return len(self.z) - 1

    def scenery_at(self, sites: np.ndarray) -> np.ndarray:
        sites = np.asarray(sites, dtype=np.int64)
        idx = np.searchsorted(self.sites, sites)
        idx_clipped = np.minimum(idx, len(self.sites) - 1)
        if len(self.sites) == 0 or np.any(self.sites[idx_clipped] != sites):
            raise KeyError("Scenery requested at a site that was never sampled")
        return self.site_values[idx_clipped]

    def congruence_ok(self) -> bool:
        periodicity = self.model.periodicity
        k = np.arange(len(self.z), dtype=np.int64)
        return bool(np.all((self.z - k * periodicity.alpha) % periodicity.d == 0))


class RwrsLocalTimeTable(BaseModel):
    """Level counts ``#{k = 1..n : Z_k = a}``."""

    model_config = ConfigDict(frozen=True)

    counts: Dict[int, int] = Field(default_factory=dict)
    n: int


def check_steps(model: ModelConfig, n: int) -> None:
    if n < 0:
        raise ValueError(f"Number of steps must be non-negative, got {n}")
    if n * model.max_abs_scenery >= INT64_LIMIT:
        raise ZOverflow(f"|Z_n| <= {n} * {model.max_abs_scenery} does not fit in 64 bits")


def _walk_positions(model: ModelConfig, n: int, rng: np.random.Generator) -> np.ndarray:
    """``S_0, ..., S_n`` from ``n`` step draws."""
    steps = model.step.sample(rng, n)
    positions = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(steps, out=positions[1:])
    return positions


def _sample_scenery(model: ModelConfig, visited: np.ndarray, rng: np.random.Generator, window: int = 0):
    """Scenery for the visited sites, drawn in first-visit order.

    Returns sorted ``sites``, their ``values`` and, for every visit, the
    index of its site in ``sites``. With ``window > 0`` the remaining sites
    within ``window`` of the visited range are drawn afterwards, ascending.
    """
    if len(visited) == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty
    sites, first_index, inverse = np.unique(visited, return_index=True, return_inverse=True)
    first_visit_order = np.argsort(first_index, kind="stable")
    values = np.empty(len(sites), dtype=np.int64)
    values[first_visit_order] = model.scenery.sample(rng, len(sites))
    if window > 0:
        span = np.arange(sites[0] - window, sites[-1] + window + 1, dtype=np.int64)
        extra = np.setdiff1d(span, sites, assume_unique=True)
        extra_values = model.scenery.sample(rng, len(extra))
        merged_sites = np.concatenate([sites, extra])
        merged_values = np.concatenate([values, extra_values])
        order = np.argsort(merged_sites, kind="stable")
        merged_sites, merged_values = merged_sites[order], merged_values[order]
        inverse = np.searchsorted(merged_sites, visited)
        return merged_sites, merged_values, inverse
    return sites, values, inverse


def simulate_walk_profile(model: ModelConfig, n: int, stream: StreamId) -> WalkLocalTimeProfile:
    check_steps(model, n)
    rng = generator(stream)
    positions = _walk_positions(model, n, rng)
    sites, counts = np.unique(positions[:n], return_counts=True)
    return WalkLocalTimeProfile(
        counts={int(site): int(count) for site, count in zip(sites, counts)},
        n=n,
        final_position=int(positions[n]),
    )


def simulate_trajectory(
    model: ModelConfig, n: int, rng: np.random.Generator, stream: StreamId, window: int = 0
) -> RwrsTrajectory:
    check_steps(model, n)
    positions = _walk_positions(model, n, rng)
    visited = positions[:n]
    sites, values, inverse = _sample_scenery(model, visited, rng, window)
    z = np.zeros(n + 1, dtype=np.int64)
    if n:
        np.cumsum(values[inverse], out=z[1:])
    return RwrsTrajectory(
        z=z, positions=visited, sites=sites, site_values=values, model=model, stream=stream
    )


def rwrs_trajectory(model: ModelConfig, n: int, stream: StreamId, window: int = 0) -> RwrsTrajectory:
    return simulate_trajectory(model, n, generator(stream), stream, window)


def rwrs_local_time_table(traj: RwrsTrajectory) -> RwrsLocalTimeTable:
    # k runs over 1..n; Z_0 is not counted
    levels, counts = np.unique(traj.z[1:], return_counts=True)
    return RwrsLocalTimeTable(
        counts={int(level): int(count) for level, count in zip(levels, counts)},
        n=traj.n,
    )


def evaluate_observable(f: Mapping[int, float], values: np.ndarray) -> np.ndarray:
    """``f(values)`` for a finitely supported ``f`` given as a mapping."""
    values = np.asarray(values)
    result = np.zeros(values.shape, dtype=np.float64)
    for level, weight in f.items():
        if weight:
            result[values == level] += weight
    return result


def observable_total(f: Mapping[int, float]) -> float:
    return float(sum(f.values()))


def observable_is_centered(f: Mapping[int, float], tolerance: float = 1e-12) -> bool:
    return abs(observable_total(f)) <= tolerance


def levels_at(traj: RwrsTrajectory, times: Optional[np.ndarray] = None) -> np.ndarray:
    if times is None:
        return traj.z
    return traj.z[np.asarray(times, dtype=np.int64)]

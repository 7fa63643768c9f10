import logging
from typing import Dict, List, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from rwrs.walks.streams import StreamId, generator

logger = logging.getLogger(__name__)


class LocalTimeGrid(BaseModel):
    """Scaled site counts of a simple walk, ``L_t(x) ~ n^{-1/2} N_{[tn]}(x sqrt n)``.

    ``values[i]`` is the local time at grid site ``origin + i``; the spatial
    position of a site is ``site * spacing``. The profile counts
    ``floor(t * n_disc)`` positions, so its occupation is ``effective_time``
    rather than the requested ``time_fraction``.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n_disc: int
    spacing: float
    origin: int
    values: np.ndarray
    time_fraction: float = Field(description="Requested t in (0, 1].")
    steps: int = Field(description="floor(t * n_disc), the number of counted positions.")

    @property
    def effective_time(self) -> float:
        """``steps / n_disc``, the time the profile actually covers."""
        return self.steps / self.n_disc

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.origin, self.origin + len(self.values), dtype=np.int64)

    @property
    def positions(self) -> np.ndarray:
        return self.sites * self.spacing

    def value(self, site: int) -> float:
        index = site - self.origin
        if 0 <= index < len(self.values):
            return float(self.values[index])
        return 0.0

    def as_dict(self) -> Dict[int, float]:
        nonzero = np.flatnonzero(self.values)
        return {int(self.origin + i): float(self.values[i]) for i in nonzero}

    def occupation(self) -> float:
        return float(np.sum(self.values) * self.spacing)

    def l2_norm_sq(self) -> float:
        return float(np.sum(self.values ** 2) * self.spacing)

    def range_width(self) -> float:
        """Length of the smallest site interval carrying the profile."""
        nonzero = np.flatnonzero(self.values)
        if len(nonzero) == 0:
            return 0.0
        return float((nonzero[-1] - nonzero[0] + 1) * self.spacing)


def l2_norm(grid: LocalTimeGrid) -> float:
    return float(np.sqrt(grid.l2_norm_sq()))


def simple_walk_positions(n_disc: int, rng: np.random.Generator) -> np.ndarray:
    """``S_0, ..., S_{n_disc - 1}`` of a simple symmetric walk."""
    steps = 2 * rng.integers(0, 2, size=max(n_disc - 1, 0), dtype=np.int64) - 1
    positions = np.zeros(n_disc, dtype=np.int64)
    np.cumsum(steps, out=positions[1:])
    return positions


def _check_times(times: Sequence[float]) -> List[float]:
    times = [float(t) for t in times]
    if not times:
        raise ValueError("At least one time fraction is required")
    if any(t <= 0 or t > 1 for t in times) or any(b < a for a, b in zip(times, times[1:])):
        raise ValueError(f"Time fractions must be ascending in (0, 1], got {times}")
    return times


def grids_from_positions(positions: np.ndarray, n_disc: int, times: Sequence[float]) -> List[LocalTimeGrid]:
    times = _check_times(times)
    spacing = n_disc ** -0.5
    origin = int(positions.min())
    width = int(positions.max()) - origin + 1
    grids = []
    for t in times:
        steps = int(np.floor(t * n_disc))
        counts = np.bincount(positions[:steps] - origin, minlength=width)
        grids.append(
            LocalTimeGrid(
                n_disc=n_disc,
                spacing=spacing,
                origin=origin,
                values=counts * spacing,
                time_fraction=t,
                steps=steps,
            )
        )
    return grids


def sample_grids(n_disc: int, times: Sequence[float], rng: np.random.Generator) -> List[LocalTimeGrid]:
    if n_disc < 1:
        raise ValueError(f"n_disc must be at least 1, got {n_disc}")
    return grids_from_positions(simple_walk_positions(n_disc, rng), n_disc, times)


def sample_local_time_grid(n_disc: int, times: Sequence[float], stream: StreamId) -> List[LocalTimeGrid]:
    """One simple-walk path of ``n_disc`` steps, profiled at every time fraction."""
    return sample_grids(n_disc, times, generator(stream))

"""Ratio ergodic averages ``sum_{k=1}^{n} f~_k / N_n(0)``.

``f~_k = g(scenery around S_k) h(Z_k)`` with ``h`` finitely supported and
``g`` one of a few scenery-window functions with known mean, so that the
limit ``E[g] sum_a h(a)`` is available in closed form.
"""

import logging
from typing import Dict, List, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from rwrs.experiments.table import ConvergenceTable, median_stderr
from rwrs.lattice.model import ModelConfig
from rwrs.walks.engine import RwrsTrajectory, evaluate_observable, rwrs_trajectory
from rwrs.walks.streams import StreamId

logger = logging.getLogger(__name__)

WindowKind = Literal["constant", "site_square", "neighbor_product", "window_sum_square"]


class RatioObservable(BaseModel):
    h: Dict[int, float] = Field(default_factory=lambda: {0: 1.0})
    g: WindowKind = "constant"
    window: int = Field(default=0, ge=0, description="Radius for window_sum_square.")

    @property
    def radius(self) -> int:
        return {"constant": 0, "site_square": 0, "neighbor_product": 1, "window_sum_square": self.window}[self.g]

    def scenery_mean(self, model: ModelConfig) -> float:
        return {
            "constant": 1.0,
            "site_square": model.sigma_xi_sq,
            "neighbor_product": 0.0,
            "window_sum_square": (2 * self.window + 1) * model.sigma_xi_sq,
        }[self.g]

    def integral(self, model: ModelConfig) -> float:
        return self.scenery_mean(model) * float(sum(self.h.values()))

    def window_values(self, traj: RwrsTrajectory, positions: np.ndarray) -> np.ndarray:
        if self.g == "constant":
            return np.ones(len(positions))
        if self.g == "site_square":
            return traj.scenery_at(positions).astype(np.float64) ** 2
        if self.g == "neighbor_product":
            return (traj.scenery_at(positions) * traj.scenery_at(positions + 1)).astype(np.float64)
        total = np.zeros(len(positions), dtype=np.int64)
        for shift in range(-self.window, self.window + 1):
            total += traj.scenery_at(positions + shift)
        return total.astype(np.float64) ** 2


def path_ratios(
    model: ModelConfig, observable: RatioObservable, n: int, checkpoints: Sequence[int], stream: StreamId
) -> np.ndarray:
    """Ratios at each checkpoint for one path; ``nan`` where ``N_c(0) = 0``."""
    # one extra step so that S_n and Z_n are both available
    traj = rwrs_trajectory(model, n + 1, stream, window=observable.radius)
    positions = traj.positions[1:n + 1]
    levels = traj.z[1:n + 1]
    terms = observable.window_values(traj, positions) * evaluate_observable(observable.h, levels)
    numerator = np.cumsum(terms)
    zeros = np.cumsum(levels == 0)
    index = np.asarray(checkpoints, dtype=np.int64) - 1
    denominator = zeros[index].astype(np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(denominator > 0, numerator[index] / np.where(denominator > 0, denominator, 1.0), np.nan)


def default_checkpoints(n: int, count: int = 5) -> List[int]:
    points = np.unique(np.geomspace(max(1, n >> (2 * (count - 1))), n, count).astype(np.int64))
    return [int(p) for p in points]


def ratio_ergodic_experiment(
    model: ModelConfig,
    observable: Optional[RatioObservable] = None,
    n: int = 1 << 20,
    paths: int = 100,
    seed: int = 0,
    checkpoints: Optional[Sequence[int]] = None,
) -> ConvergenceTable:
    """Median over paths of the ratio at each checkpoint against ``E[g] sum_a h(a)``.

    Each path runs on its own stream ``(seed, "ratio", path)``.
    """
    observable = observable or RatioObservable()
    checkpoints = sorted(checkpoints or default_checkpoints(n))
    if checkpoints[-1] > n or checkpoints[0] < 1:
        raise ValueError(f"Checkpoints must lie in [1, {n}], got {checkpoints}")
    print(f">> ratio: n={n} paths={paths} g={observable.g}")
    ratios = np.vstack(
        [
            path_ratios(model, observable, n, checkpoints, StreamId(seed=seed, experiment="ratio", replicate=path))
            for path in range(paths)
        ]
    )
    target = observable.integral(model)
    table = ConvergenceTable(experiment="ratio", summary={"target": target})
    for column, checkpoint in enumerate(checkpoints):
        values = ratios[:, column]
        defined = values[np.isfinite(values)]
        undefined = len(values) - len(defined)
        if undefined:
            logger.warning("Checkpoint %d: %d of %d paths have N(0) = 0", checkpoint, undefined, len(values))
        median = float(np.median(defined)) if len(defined) else float("nan")
        table.add(
            n=int(checkpoint),
            statistic="ratio_median",
            value=median,
            stderr=median_stderr(defined) if len(defined) else float("nan"),
            target=target,
            provenance="limit_suite:ratio_integral",
            reps=len(defined),
            extra={"undefined": undefined},
        )
    return table

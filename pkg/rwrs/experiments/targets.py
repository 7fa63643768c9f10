"""Theoretical targets for the limit experiments.

Every target is estimated on its own ``targets/*`` streams, never on the
streams that produce the empirical values it is compared with.
"""

import logging
import math
from typing import Dict, List, Optional, Sequence

from pydantic import BaseModel, Field

from rwrs.brownian.estimators import gram_inverse_sqrt_moment, l2_inverse_moment
from rwrs.moments.engine import ks_local_time_moment

logger = logging.getLogger(__name__)

SQRT_TWO_PI = math.sqrt(2 * math.pi)


class TargetValue(BaseModel):
    value: float
    stderr: float
    provenance: str


class MomentTargets(BaseModel):
    """``E[|L_1|^{-1}]`` and ``E[L_1(0)^j]`` for the local time of ``Delta`` (unit scenery variance)."""

    inverse_norm: TargetValue
    local_time_moments: Dict[int, TargetValue] = Field(default_factory=dict)
    joint_times: List[float] = Field(default_factory=list)
    gram_joint: Optional[TargetValue] = Field(
        default=None, description="E[det D_{T_1..T_k}^{-1/2}] at joint_times"
    )

    def local_time_moment(self, order: int) -> TargetValue:
        if order == 0:
            return TargetValue(value=1.0, stderr=0.0, provenance="moment_engine:trivial")
        if order not in self.local_time_moments:
            raise KeyError(f"No target for E[L_1(0)^{order}]")
        return self.local_time_moments[order]

    def local_limit_density(self, d: int, sigma_xi: float) -> float:
        """``d E[|L_1|^{-1}] / (sqrt(2 pi) sigma_xi)``."""
        return d * self.inverse_norm.value / (SQRT_TWO_PI * sigma_xi)

    def joint_density(self, d: int, sigma_xi: float) -> Optional[float]:
        """``(d / (sqrt(2 pi) sigma_xi))^k E[det D_{T_1..T_k}^{-1/2}]``; ``None`` without a Gram target."""
        if self.gram_joint is None:
            return None
        return (d / (SQRT_TWO_PI * sigma_xi)) ** len(self.joint_times) * self.gram_joint.value


def first_moment_from_inverse_norm(inverse_norm: TargetValue) -> TargetValue:
    """``E[L_1(0)] = 4 E[|L_1|^{-1}] / sqrt(2 pi)``."""
    scale = 4 / SQRT_TWO_PI
    return TargetValue(
        value=scale * inverse_norm.value,
        stderr=scale * inverse_norm.stderr,
        provenance="moment_engine:first_moment_identity",
    )


def compute_moment_targets(
    max_moment: int,
    n_disc: int,
    budget: int,
    seed: int,
    workers: int = 1,
    simplex_budget: Optional[int] = None,
    joint_times: Sequence[float] = (),
) -> MomentTargets:
    report = l2_inverse_moment(n_disc, budget, seed, experiment="targets/l2_inverse", workers=workers)
    inverse_norm = TargetValue(
        value=report.estimate, stderr=report.stderr, provenance="brownian_lab:l2_inverse_moment"
    )
    moments: Dict[int, TargetValue] = {}
    if max_moment >= 1:
        moments[1] = first_moment_from_inverse_norm(inverse_norm)
    for order in range(2, max_moment + 1):
        estimate = ks_local_time_moment(
            order,
            sigma_xi=1.0,
            simplex_budget=simplex_budget or budget,
            path_budget=1,
            n_disc=n_disc,
            seed=seed,
            experiment=f"targets/ks_m{order}",
            workers=workers,
        )
        moments[order] = TargetValue(
            value=estimate.value, stderr=estimate.stderr, provenance="moment_engine:ks_local_time_moment"
        )
    gram = None
    if joint_times:
        gram_report = gram_inverse_sqrt_moment(
            joint_times, n_disc, budget, seed, experiment="targets/gram_joint", workers=workers
        )
        gram = TargetValue(
            value=gram_report.estimate,
            stderr=gram_report.stderr,
            provenance="brownian_lab:gram_inverse_sqrt_moment",
        )
    logger.info("Moment targets: E|L_1|^-1 = %.5g", inverse_norm.value)
    return MomentTargets(
        inverse_norm=inverse_norm, local_time_moments=moments, joint_times=list(joint_times), gram_joint=gram
    )

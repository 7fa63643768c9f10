from rwrs.walks.batch import (
    STATISTICS,
    BatchEstimate,
    StatisticSpec,
    batch_estimate,
    sample_levels,
    sample_statistic,
)
from rwrs.walks.engine import (
    RwrsLocalTimeTable,
    RwrsTrajectory,
    WalkLocalTimeProfile,
    evaluate_observable,
    rwrs_local_time_table,
    rwrs_trajectory,
    simulate_walk_profile,
)
from rwrs.walks.streams import StreamId, generator

__all__ = [
    "STATISTICS",
    "BatchEstimate",
    "StatisticSpec",
    "batch_estimate",
    "sample_levels",
    "sample_statistic",
    "RwrsLocalTimeTable",
    "RwrsTrajectory",
    "WalkLocalTimeProfile",
    "evaluate_observable",
    "rwrs_local_time_table",
    "rwrs_trajectory",
    "simulate_walk_profile",
    "StreamId",
    "generator",
]

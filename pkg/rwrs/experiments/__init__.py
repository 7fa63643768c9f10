from rwrs.experiments.clt import clt_experiment, clt_moment_target
from rwrs.experiments.functional import functional_limit_check, ks_statistic
from rwrs.experiments.lln import lln_experiment
from rwrs.experiments.local_limit import local_limit_check
from rwrs.experiments.ratio import RatioObservable, ratio_ergodic_experiment
from rwrs.experiments.table import (
    ConvergenceRow,
    ConvergenceTable,
    is_non_increasing,
    is_strictly_decreasing,
)
from rwrs.experiments.targets import MomentTargets, TargetValue, compute_moment_targets

__all__ = [
    "clt_experiment",
    "clt_moment_target",
    "functional_limit_check",
    "ks_statistic",
    "lln_experiment",
    "local_limit_check",
    "RatioObservable",
    "ratio_ergodic_experiment",
    "ConvergenceRow",
    "ConvergenceTable",
    "is_non_increasing",
    "is_strictly_decreasing",
    "MomentTargets",
    "TargetValue",
    "compute_moment_targets",
]

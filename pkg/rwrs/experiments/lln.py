import logging
from typing import Mapping, Optional, Sequence

import numpy as np

from rwrs.experiments.table import ConvergenceTable, sample_moment
from rwrs.experiments.targets import MomentTargets
from rwrs.lattice.model import ModelConfig
from rwrs.walks.batch import StatisticSpec, sample_statistic

logger = logging.getLogger(__name__)

DEFAULT_N_LIST = (1 << 10, 1 << 12, 1 << 14, 1 << 16)


def observable_sum_samples(
    model: ModelConfig,
    f: Mapping[int, float],
    n: int,
    reps: int,
    statistic: str,
    seed: int,
    experiment: str,
    workers: int = 1,
) -> np.ndarray:
    spec = StatisticSpec(name=statistic, observable={int(a): float(w) for a, w in f.items()})
    return sample_statistic(model, n, reps, spec, seed, experiment=f"{experiment}/n{n}", workers=workers)


def lln_experiment(
    model: ModelConfig,
    f: Mapping[int, float],
    n_list: Sequence[int] = DEFAULT_N_LIST,
    reps: int = 10_000,
    max_moment: int = 2,
    seed: int = 0,
    targets: Optional[MomentTargets] = None,
    workers: int = 1,
) -> ConvergenceTable:
    """Moments of ``n^{-1/4} sum_{k<n} f(Z_k)`` against ``(sum f)^j sigma_xi^{-j} E[L_1(0)^j]``."""
    mass = float(sum(f.values()))
    table = ConvergenceTable(experiment="lln", summary={"observable_mass": mass})
    for n in n_list:
        print(f">> lln: n={n} reps={reps}")
        samples = observable_sum_samples(model, f, n, reps, "lln_sum", seed, "lln", workers)
        for order in range(1, max_moment + 1):
            value, stderr = sample_moment(samples, order)
            target, provenance = None, ""
            if mass == 0:
                target, provenance = 0.0, "limit_suite:centered_observable"
            elif targets is not None:
                moment = targets.local_time_moment(order)
                target = mass ** order * model.sigma_xi ** -order * moment.value
                provenance = moment.provenance
            table.add(
                n=n,
                statistic=f"moment_{order}",
                value=value,
                stderr=stderr,
                target=target,
                provenance=provenance,
                reps=reps,
                extra={"order": order},
            )
    return table

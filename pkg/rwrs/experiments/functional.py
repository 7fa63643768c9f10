import logging
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from rwrs.brownian.estimators import delta_endpoint_samples
from rwrs.experiments.table import ConvergenceTable, median_stderr
from rwrs.lattice.model import ModelConfig
from rwrs.walks.batch import sample_statistic

logger = logging.getLogger(__name__)

DEFAULT_N_LIST = (1 << 10, 1 << 14, 1 << 16)


def ks_statistic(first: np.ndarray, second: np.ndarray) -> float:
    return float(stats.ks_2samp(first, second).statistic)


def functional_limit_check(
    model: ModelConfig,
    n_list: Sequence[int] = DEFAULT_N_LIST,
    reps: int = 10_000,
    n_disc: int = 1 << 14,
    seed: int = 0,
    delta_samples: Optional[np.ndarray] = None,
    workers: int = 1,
) -> ConvergenceTable:
    """Two-sample KS distance between ``n^{-3/4} Z_n / sigma_xi`` and ``Delta_1``."""
    if delta_samples is None:
        delta_samples, _ = delta_endpoint_samples(n_disc, reps, seed, experiment="functional/delta", workers=workers)
    table = ConvergenceTable(experiment="functional")
    for n in n_list:
        print(f">> functional: n={n} reps={reps}")
        endpoint = sample_statistic(model, n, reps, "endpoint", seed, experiment=f"functional/n{n}", workers=workers)
        scaled = endpoint / model.sigma_xi
        result = stats.ks_2samp(scaled, delta_samples)
        # natural scale of the two-sample statistic
        scale = float(np.sqrt((len(scaled) + len(delta_samples)) / (len(scaled) * len(delta_samples))))
        table.add(
            n=n, statistic="ks_statistic", value=float(result.statistic), stderr=scale, target=0.0,
            provenance="brownian_lab:simulate_delta_endpoint", reps=reps, extra={"p_value": float(result.pvalue)},
        )
        if model.step.is_symmetric and model.scenery.is_symmetric:
            table.add(
                n=n, statistic="median", value=float(np.median(endpoint)), stderr=median_stderr(endpoint),
                target=0.0, provenance="limit_suite:symmetry", reps=reps,
            )
    return table

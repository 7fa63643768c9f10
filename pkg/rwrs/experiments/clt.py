import logging
import math
from typing import Mapping, Optional, Sequence

from rwrs.errors import ObservableNotCentered
from rwrs.experiments.lln import DEFAULT_N_LIST, observable_sum_samples
from rwrs.experiments.table import ConvergenceTable, sample_moment
from rwrs.experiments.targets import MomentTargets
from rwrs.green_kubo.blocks import CENTERING_TOLERANCE, GreenKuboResult, sigma2_f
from rwrs.lattice.model import ModelConfig

logger = logging.getLogger(__name__)


def clt_moment_target(order: int, sigma2: float, sigma_xi: float, targets: MomentTargets) -> float:
    """``(2N)!/(N! 2^N) (sigma2 / sigma_xi)^N E[L_1(0)^N]`` for ``order = 2N``; odd orders give 0."""
    if order % 2:
        return 0.0
    half = order // 2
    gaussian = math.factorial(order) / (math.factorial(half) * 2 ** half)
    return gaussian * (sigma2 / sigma_xi) ** half * targets.local_time_moment(half).value


def clt_experiment(
    model: ModelConfig,
    f: Mapping[int, float],
    n_list: Sequence[int] = DEFAULT_N_LIST,
    reps: int = 10_000,
    max_moment: int = 3,
    seed: int = 0,
    targets: Optional[MomentTargets] = None,
    green_kubo: Optional[GreenKuboResult] = None,
    workers: int = 1,
    **green_kubo_options,
) -> ConvergenceTable:
    """Moments of ``n^{-1/8} sum_{k<n} f(Z_k)`` for centered ``f``."""
    total = float(sum(f.values()))
    if abs(total) > CENTERING_TOLERANCE:
        raise ObservableNotCentered(f"The CLT experiment needs sum f = 0, got {total}")
    if green_kubo is None:
        green_kubo = sigma2_f(model, f, seed=seed, workers=workers, **green_kubo_options)
    sigma2 = green_kubo.sigma2
    table = ConvergenceTable(
        experiment="clt", summary={"sigma2": sigma2, "sigma2_stderr": green_kubo.stderr}
    )
    for n in n_list:
        print(f">> clt: n={n} reps={reps}")
        samples = observable_sum_samples(model, f, n, reps, "clt_sum", seed, "clt", workers)
        for order in range(1, max_moment + 1):
            value, stderr = sample_moment(samples, order)
            target, provenance = None, ""
            if order % 2:
                target, provenance = 0.0, "limit_suite:odd_moment"
            elif targets is not None:
                target = clt_moment_target(order, sigma2, model.sigma_xi, targets)
                provenance = f"green_kubo:sigma2_f+{targets.local_time_moment(order // 2).provenance}"
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

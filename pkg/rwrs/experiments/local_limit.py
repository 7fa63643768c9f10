import logging
from typing import List, Optional, Sequence

import numpy as np

from rwrs.errors import CapExceeded, NonRationalModel
from rwrs.experiments.table import ConvergenceTable
from rwrs.experiments.targets import MomentTargets
from rwrs.lattice.model import ModelConfig
from rwrs.oracle.exact import exact_Z_pmf, scaled_joint_sup
from rwrs.walks.batch import sample_levels

logger = logging.getLogger(__name__)

DEFAULT_N_LIST = (1 << 10, 1 << 12, 1 << 14)


def _probability_row(hits: np.ndarray, reps: int):
    p = float(np.count_nonzero(hits)) / reps
    return p, float(np.sqrt(p * (1 - p) / reps))


def local_limit_check(
    model: ModelConfig,
    a_list: Sequence[int] = (0,),
    n_list: Sequence[int] = DEFAULT_N_LIST,
    reps: int = 1_000_000,
    seed: int = 0,
    targets: Optional[MomentTargets] = None,
    joint_times: Sequence[float] = (),
    anchor_n: Optional[int] = 12,
    cap: Optional[int] = None,
    workers: int = 1,
    bound_orders: Sequence[int] = (),
) -> ConvergenceTable:
    """``n^{3/4} P(Z_n = a)`` and, with ``joint_times`` ``T_1 < ... < T_k = 1``,
    ``n^{3k/4} P(Z_{floor(T_1 n)} = a, ..., Z_{floor(T_k n)} = a)``.

    Levels outside ``n alpha + dZ`` produce congruence rows whose empirical
    value must be exactly zero.
    """
    d = model.periodicity.d
    sigma_xi = model.sigma_xi
    table = ConvergenceTable(experiment="local_limit")
    violations = 0
    for n in n_list:
        print(f">> local-limit: n={n} reps={reps}")
        joint = _joint_indices(joint_times, n)
        times = joint or [n]
        levels = sample_levels(model, n, reps, times=times, seed=seed, experiment=f"local_limit/n{n}", workers=workers)
        endpoint = levels[:, -1]
        violations += int(np.count_nonzero((endpoint - n * model.periodicity.alpha) % d))
        scale = n ** 0.75
        for a in a_list:
            p, p_err = _probability_row(endpoint == a, reps)
            if not model.admissible(n, a):
                table.add(
                    n=n, statistic=f"congruence_zero_a{a}", value=p, stderr=0.0, target=0.0,
                    provenance="lattice_model:periodicity", reps=reps, extra={"level": a},
                )
                continue
            target, provenance = None, ""
            if targets is not None:
                target = targets.local_limit_density(d, sigma_xi)
                provenance = targets.inverse_norm.provenance
            table.add(
                n=n, statistic=f"scaled_probability_a{a}", value=scale * p, stderr=scale * p_err,
                target=target, provenance=provenance, reps=reps, extra={"level": a},
            )
            if joint and all(model.admissible(t, a) for t in joint):
                p_joint, joint_err = _probability_row(np.all(levels == a, axis=1), reps)
                target, provenance = None, ""
                if targets is not None and targets.gram_joint is not None:
                    target = targets.joint_density(d, sigma_xi)
                    provenance = targets.gram_joint.provenance
                joint_scale = n ** (0.75 * len(joint))
                table.add(
                    n=n, statistic=f"scaled_joint_probability_a{a}", value=joint_scale * p_joint,
                    stderr=joint_scale * joint_err, target=target, provenance=provenance, reps=reps,
                    extra={"level": a, "joint_order": len(joint)},
                )
    if anchor_n is not None:
        _add_anchor_rows(table, model, a_list, anchor_n, cap)
        for order in bound_orders:
            _add_bound_rows(table, model, order, anchor_n, cap)
    table.summary["congruence_violations"] = violations
    return table


def _add_anchor_rows(table: ConvergenceTable, model: ModelConfig, a_list: Sequence[int], n: int, cap: Optional[int]) -> None:
    try:
        pmf = exact_Z_pmf(model, n, cap)
    except (CapExceeded, NonRationalModel) as e:
        logger.warning("Skipping exact anchor rows: %s", e)
        return
    for a in a_list:
        if model.admissible(n, a):
            table.add(
                n=n, statistic=f"exact_anchor_a{a}", value=n ** 0.75 * float(pmf.mass(a)), stderr=0.0,
                reps=0, extra={"level": a},
            )


def _joint_indices(joint_times: Sequence[float], n: int) -> List[int]:
    if not joint_times:
        return []
    fractions = [float(t) for t in joint_times]
    if fractions[-1] != 1.0 or any(not 0 < a < b for a, b in zip([0.0] + fractions, fractions)):
        raise ValueError(f"Joint times must ascend in (0, 1] and end at 1, got {fractions}")
    indices = [int(np.floor(t * n)) for t in fractions]
    if indices[0] < 1 or len(set(indices)) != len(indices):
        raise ValueError(f"n={n} is too small to separate the joint times {fractions}")
    return indices


def _add_bound_rows(table: ConvergenceTable, model: ModelConfig, order: int, horizon: int, cap: Optional[int]) -> None:
    """``max_a prod n_j^{3/4} P(...)`` over equal gaps ``m`` with ``order * m <= horizon``."""
    for gap in range(1, horizon // order + 1):
        try:
            value = scaled_joint_sup(model, [gap] * order, cap)
        except (CapExceeded, NonRationalModel) as e:
            logger.warning("Stopping uniform-bound rows of order %d: %s", order, e)
            return
        table.add(
            n=gap * order, statistic=f"uniform_bound_k{order}", value=value, stderr=0.0,
            provenance="exact_oracle:scaled_joint_sup", reps=0, extra={"gap": gap},
        )
    rows = table.select(f"uniform_bound_k{order}")
    if rows:
        table.summary[f"uniform_bound_k{order}_max"] = max(r.value for r in rows)

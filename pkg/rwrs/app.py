import logging
import math
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np
import pandas as pd
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

from rwrs.brownian.estimators import (
    exponent_fit,
    inverse_distance_moments_vk,
    l2_inverse_moment,
    scaling_law_ratios,
)
from rwrs.brownian.gram import gram_recursion_residuals
from rwrs.brownian.local_time import sample_grids
from rwrs.errors import UnknownExperiment
from rwrs.experiments.clt import clt_experiment
from rwrs.experiments.functional import functional_limit_check
from rwrs.experiments.lln import lln_experiment
from rwrs.experiments.local_limit import local_limit_check
from rwrs.experiments.ratio import RatioObservable, ratio_ergodic_experiment
from rwrs.experiments.table import ConvergenceTable, is_non_increasing, is_strictly_decreasing
from rwrs.experiments.targets import compute_moment_targets
from rwrs.green_kubo.blocks import block_lags, sigma2_f
from rwrs.lattice.model import ModelConfig
from rwrs.moments.engine import (
    envelope_carleman,
    ks_local_time_moment,
    lower_sandwich_growth,
    moment_sandwich,
)
from rwrs.moments.simplex import beta_recursion_residuals, simplex_closed_form, simplex_integral_mc
from rwrs.oracle.coefficients import A_coefficient_exact
from rwrs.oracle.exact import exact_Z_pmf, total_variation
from rwrs.readers.config import EffectiveConfig, load_config
from rwrs.reports.artifacts import Criterion, ExperimentReport, write_artifacts
from rwrs.walks.batch import StatisticSpec, batch_estimate, sample_levels, sample_statistic
from rwrs.walks.streams import StreamId, generator

logger = logging.getLogger(__name__)

load_dotenv()

LOWER_GROWTH_BAND = (0.4, 1.0)
PLATEAU_RATIO_BAND = (0.8, 1.25)
BETA_RECURSION_TOLERANCE = 1e-12
GRAM_RECURSION_SAMPLES = 100
REPRODUCIBILITY_WORKERS = (1, 4, 8)
IDENTITY_TOLERANCE = 1e-12
GRAM_RECURSION_TIMES = 5


class Outcome(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    payload: Dict[str, Any] = Field(default_factory=dict)
    tables: Dict[str, pd.DataFrame] = Field(default_factory=dict)
    criteria: List[Criterion] = Field(default_factory=list)
    provenance: Dict[str, str] = Field(default_factory=dict)
    raw: Dict[str, np.ndarray] = Field(default_factory=dict)


def _table_provenance(table: ConvergenceTable) -> Dict[str, str]:
    return {row.statistic: row.provenance for row in table.rows if row.provenance}


def _congruence_violations(model: ModelConfig, levels: np.ndarray, times) -> int:
    times = np.asarray(times, dtype=np.int64)
    periodicity = model.periodicity
    return int(np.count_nonzero((levels - times * periodicity.alpha) % periodicity.d))


def run_model_check(config: EffectiveConfig, model: ModelConfig) -> Outcome:
    opts, seed = config.experiment, config.run.seed
    outcome = Outcome(payload={"model": model.echo()})
    print(f">> Model: sigma_xi^2={model.sigma_xi_sq} periodicity={model.periodicity.model_dump()}")
    if 2 in config.criteria:
        n = min(opts.n_list)
        times = list(range(1, n + 1))
        levels = sample_levels(model, n, max(opts.reps, 1), times=times, seed=seed, experiment="model-check/congruence")
        violations = _congruence_violations(model, levels, times)
        outcome.payload["congruence_violations"] = violations
        outcome.criteria.append(Criterion.check(2, violations == 0, violations, 0.0, f"n={n}"))
    return outcome


def run_exact_dist(config: EffectiveConfig, model: ModelConfig) -> Outcome:
    opts, seed = config.experiment, config.run.seed
    rows, payload = [], {}
    pmfs = {}
    for k in opts.times:
        pmf = exact_Z_pmf(model, k, opts.cap)
        pmfs[k] = pmf
        rows.extend({"k": k, **row} for row in pmf.to_rows())
        payload[str(k)] = {"total_mass": str(pmf.total()), "symmetric": pmf.is_symmetric(), "atoms": len(pmf.atoms)}
        print(f">> exact-dist: k={k} atoms={len(pmf.atoms)}")
    outcome = Outcome(
        payload={"pmfs": payload},
        tables={"exact-dist": pd.DataFrame(rows, columns=["k", "value", "numerator", "denominator"])},
        provenance={"exact_Z_pmf": "exact_oracle:exact_Z_pmf"},
    )
    if 1 in config.criteria or 2 in config.criteria:
        times = sorted(opts.times)
        levels = sample_levels(
            model, max(times), opts.reps, times=times, seed=seed, experiment="exact-dist/mc", workers=config.run.workers
        )
        distances = {k: total_variation(levels[:, i], pmfs[k]) for i, k in enumerate(times)}
        outcome.payload["total_variation"] = {str(k): v for k, v in distances.items()}
        if 1 in config.criteria:
            worst = max(distances.values())
            outcome.criteria.append(Criterion.check(1, worst <= config.criteria[1], worst, config.criteria[1]))
        if 2 in config.criteria:
            violations = _congruence_violations(model, levels, times)
            outcome.criteria.append(Criterion.check(2, violations == 0, violations, 0.0))
    return outcome


def run_batch(config: EffectiveConfig, model: ModelConfig) -> Outcome:
    opts, seed, workers = config.experiment, config.run.seed, config.run.workers
    spec = StatisticSpec(name=opts.statistic, observable=opts.observable, level=opts.level)
    estimates = []
    outcome = Outcome()
    for n in opts.n_list:
        estimate = batch_estimate(
            model, n, opts.reps, spec, seed, workers=workers, experiment=f"batch/n{n}",
            keep_samples=opts.keep_samples, progress=config.run.progress,
        )
        print(f">> batch: {spec.name} n={n} estimate={estimate.estimate:.6g} stderr={estimate.stderr:.3g}")
        estimates.append(estimate)
        if estimate.samples is not None:
            outcome.raw[f"batch_n{n}"] = estimate.samples
    outcome.tables["batch"] = pd.DataFrame(
        [e.to_row() for e in estimates], columns=["statistic", "n", "reps", "estimate", "stderr", "seed"]
    )
    outcome.payload["estimates"] = [e.model_dump() for e in estimates]
    if 14 in config.criteria:
        n = opts.n_list[0]
        runs = [
            sample_statistic(model, n, opts.reps, spec, seed, experiment=f"batch/n{n}", workers=w)
            for w in REPRODUCIBILITY_WORKERS
        ]
        identical = all(np.array_equal(runs[0], other) for other in runs[1:])
        outcome.criteria.append(
            Criterion.check(14, identical, detail=f"workers={list(REPRODUCIBILITY_WORKERS)}")
        )
    return outcome


def _block_via_a_coefficients(model: ModelConfig, f: Mapping[int, float], k: int, cap: int):
    return sum(
        A_coefficient_exact(model, f, shift, lag, cap)
        for lag in block_lags(model, k)
        for shift in range(model.periodicity.d)
    )


def run_green_kubo(config: EffectiveConfig, model: ModelConfig) -> Outcome:
    opts, seed, workers = config.experiment, config.run.seed, config.run.workers
    options = dict(
        exact_horizon=opts.exact_horizon, mc_budget=opts.mc_budget, seed=seed,
        enforce_centered=opts.enforce_centered, cap=opts.cap, workers=workers,
    )
    result = sigma2_f(model, opts.observable, mc_horizon=opts.mc_horizon, **options)
    print(f">> green-kubo: sigma2={result.sigma2:.6g} stderr={result.stderr:.3g} tail={result.tail_estimate:.3g}")
    outcome = Outcome(
        payload={**result.summary(), "exact_blocks": {str(b.k): b.exact_value for b in result.blocks if b.exact_value}},
        tables={"green-kubo": result.to_frame()},
        provenance={"sigma2": "green_kubo:sigma2_f"},
    )
    if 8 in config.criteria:
        mismatched = [
            b.k for b in result.blocks
            if b.source == "exact"
            and abs(float(_block_via_a_coefficients(model, opts.observable, b.k, opts.cap)) - b.value)
            > IDENTITY_TOLERANCE * max(1.0, abs(b.value))
        ]
        horizon = max(opts.exact_horizon, opts.mc_horizon)
        extended = sigma2_f(model, opts.observable, mc_horizon=int(math.ceil(1.5 * horizon)), **options)
        change = abs(extended.sigma2 - result.sigma2) / abs(result.sigma2) if result.sigma2 else math.inf
        outcome.payload["horizon_relative_change"] = change
        passed = not mismatched and change <= config.criteria[8]
        outcome.criteria.append(
            Criterion.check(8, passed, change, config.criteria[8], f"identity_mismatches={mismatched}")
        )
    return outcome


def _random_times(rng: np.random.Generator, count: int) -> List[float]:
    return sorted(float(t) for t in 1.0 - rng.random(count))


def run_brownian(config: EffectiveConfig, model: ModelConfig) -> Outcome:
    opts, seed, workers = config.experiment, config.run.seed, config.run.workers
    inverse = l2_inverse_moment(opts.n_disc, opts.budget, seed, workers=workers)
    reports = inverse_distance_moments_vk(opts.ks, opts.n_disc, opts.budget, seed, workers=workers)
    slope = exponent_fit(opts.ks, [r.estimate for r in reports])
    scaling = scaling_law_ratios(opts.scaling_times, opts.n_disc, opts.budget, seed, workers=workers)
    print(f">> brownian: E|L1|^-1={inverse.estimate:.5g} V_k slope={slope:.3f}")
    for row in scaling:
        print(f">> brownian: scaling u={row.u:g} ratio={row.ratio:.4f} stderr={row.stderr:.2g}")
    frame = pd.DataFrame([inverse.to_row()] + [r.to_row() for r in reports])
    outcome = Outcome(
        payload={
            "l2_inverse": inverse.model_dump(),
            "vk_slope": slope,
            "scaling_law": [row.model_dump() for row in scaling],
        },
        tables={"brownian": frame},
        provenance={"l2_inverse": "brownian_lab:l2_inverse_moment", "vk": "brownian_lab:inverse_distance_moment_vk"},
    )
    if 4 in config.criteria:
        worst = 0.0
        for replicate in range(GRAM_RECURSION_SAMPLES):
            rng = generator(StreamId(seed=seed, experiment="brownian/gram_recursion", replicate=replicate))
            grids = sample_grids(opts.n_disc, _random_times(rng, GRAM_RECURSION_TIMES), rng)
            residuals = gram_recursion_residuals(grids)
            residuals = residuals[np.isfinite(residuals)]
            if len(residuals):
                worst = max(worst, float(residuals.max()))
        outcome.payload["gram_recursion_worst"] = worst
        outcome.criteria.append(Criterion.check(4, worst <= config.criteria[4], worst, config.criteria[4]))
    if 7 in config.criteria:
        outcome.criteria.append(
            Criterion.check(7, abs(slope - 0.5) <= config.criteria[7], slope, config.criteria[7], "band around 0.5")
        )
    return outcome


def run_moments(config: EffectiveConfig, model: ModelConfig) -> Outcome:
    opts, seed, workers = config.experiment, config.run.seed, config.run.workers
    sigma_xi = model.sigma_xi
    max_m = max(opts.m_list)
    inverse = l2_inverse_moment(opts.n_disc, opts.budget, seed, experiment="moments/l2_inverse", workers=workers)
    vk_reports = (
        inverse_distance_moments_vk(range(1, max_m), opts.n_disc, opts.budget, seed, experiment="moments/vk", workers=workers)
        if max_m > 1 else []
    )
    vk_inverse = {r.k: r.estimate for r in vk_reports}
    vk_stderr = {r.k: r.stderr for r in vk_reports}
    rows, simplex_estimates, contained = [], [], []
    for m in opts.m_list:
        estimate = ks_local_time_moment(
            m, sigma_xi, simplex_budget=opts.budget, path_budget=1, n_disc=opts.n_disc, seed=seed, workers=workers
        )
        bounds = moment_sandwich(m, sigma_xi, inverse.estimate, vk_inverse, inverse.stderr, vk_stderr)
        inside = bounds.contains(estimate.value, estimate.stderr, config.criteria.get(13, 3.0))
        contained.append(inside)
        simplex_estimates.append(simplex_integral_mc(m, opts.simplex_samples, seed, opts.concentration, workers=workers))
        rows.append(
            {
                "m": m,
                "closed_form": simplex_closed_form(m),
                "estimate": estimate.value,
                "stderr": estimate.stderr,
                "lower": bounds.lower,
                "upper": bounds.upper,
            }
        )
        print(f">> moments: m={m} E[L^m]={estimate.value:.5g} in [{bounds.lower:.5g}, {bounds.upper:.5g}]")
    _, growth = lower_sandwich_growth(list(range(2, 7)), sigma_xi, inverse.estimate)
    series = envelope_carleman(opts.carleman_terms, opts.envelope_a, opts.eta0)
    carleman_growth = series.growth_exponent(start=max(1, opts.carleman_terms // 10))
    outcome = Outcome(
        payload={
            "lower_growth_exponent": growth,
            "carleman_growth_exponent": carleman_growth,
            "carleman_total": series.total,
            "simplex_mc": [e.model_dump() for e in simplex_estimates],
        },
        tables={
            "moments": pd.DataFrame(rows),
            "carleman": pd.DataFrame(
                {
                    "M": np.arange(1, len(series.partial_sums) + 1),
                    "partial_sum": series.partial_sums,
                    "companion_sum": series.companion_sums,
                }
            ),
        },
        provenance={
            "estimate": "moment_engine:ks_local_time_moment",
            "lower": "moment_engine:moment_sandwich",
            "upper": "moment_engine:moment_sandwich(proxy)",
        },
    )
    if 3 in config.criteria:
        worst = max(estimate.relative_error for estimate in simplex_estimates)
        recursion = float(np.max(beta_recursion_residuals(40)))
        passed = worst <= config.criteria[3] and simplex_closed_form(1) == 4.0 and recursion <= BETA_RECURSION_TOLERANCE
        outcome.criteria.append(
            Criterion.check(3, passed, worst, config.criteria[3], f"beta_recursion={recursion:.2e}")
        )
    if 13 in config.criteria:
        in_band = LOWER_GROWTH_BAND[0] <= growth <= LOWER_GROWTH_BAND[1]
        outcome.criteria.append(
            Criterion.check(
                13, all(contained) and in_band, growth, config.criteria[13],
                f"contained={contained} lower_growth_band={LOWER_GROWTH_BAND}",
            )
        )
    return outcome


def _relative_error(value: float, target: float) -> float:
    return abs(value - target) / abs(target) if target else abs(value)


def run_lln(config: EffectiveConfig, model: ModelConfig) -> Outcome:
    opts, seed, workers = config.experiment, config.run.seed, config.run.workers
    targets = compute_moment_targets(opts.max_moment, opts.target_n_disc, opts.target_budget, seed, workers)
    table = lln_experiment(model, opts.observable, opts.n_list, opts.reps, opts.max_moment, seed, targets, workers)
    outcome = Outcome(payload={"targets": targets.model_dump(), **table.summary}, provenance=_table_provenance(table))
    if 5 in config.criteria:
        n = max(opts.n_list)
        estimate = batch_estimate(model, n, opts.reps, "local_time_zero", seed, workers=workers, experiment="lln/local_time_zero")
        target = targets.local_time_moment(1).value / model.sigma_xi
        table.add(
            n=n, statistic="local_time_zero", value=estimate.estimate, stderr=estimate.stderr, target=target,
            provenance=targets.local_time_moment(1).provenance, reps=opts.reps,
        )
        error = _relative_error(estimate.estimate, target)
        outcome.criteria.append(Criterion.check(5, error <= config.criteria[5], error, config.criteria[5], f"n={n}"))
    if 10 in config.criteria:
        errors = [_relative_error(r.value, r.target) for r in table.select("moment_1") if r.target is not None]
        passed = bool(errors) and errors[-1] <= config.criteria[10] and is_non_increasing(errors)
        outcome.criteria.append(
            Criterion.check(10, passed, errors[-1] if errors else None, config.criteria[10], f"errors={errors}")
        )
    outcome.tables["lln"] = table.to_frame()
    return outcome


def run_clt(config: EffectiveConfig, model: ModelConfig) -> Outcome:
    opts, seed, workers = config.experiment, config.run.seed, config.run.workers
    green_kubo = sigma2_f(
        model, opts.observable, exact_horizon=opts.exact_horizon, mc_horizon=opts.mc_horizon,
        mc_budget=opts.mc_budget, seed=seed, cap=opts.cap, workers=workers,
    )
    targets = compute_moment_targets(max(1, opts.max_moment // 2), opts.target_n_disc, opts.target_budget, seed, workers)
    table = clt_experiment(
        model, opts.observable, opts.n_list, opts.reps, opts.max_moment, seed, targets, green_kubo, workers
    )
    outcome = Outcome(
        payload={"targets": targets.model_dump(), **table.summary},
        tables={"clt": table.to_frame()},
        provenance=_table_provenance(table),
    )
    if 9 in config.criteria:
        n = max(opts.n_list)
        odd_ok = all(
            abs(table.row(f"moment_{order}", n).value) <= 3 * table.row(f"moment_{order}", n).stderr
            for order in (1, 3) if order <= opts.max_moment
        )
        ratios = [r.value / r.target for r in table.select("moment_2") if r.target]
        distances = [abs(r - 1) for r in ratios[-3:]]
        band = config.criteria[9]
        passed = odd_ok and bool(ratios) and abs(ratios[-1] - 1) <= band and is_non_increasing(distances)
        outcome.criteria.append(
            Criterion.check(9, passed, ratios[-1] if ratios else None, band, f"odd_ok={odd_ok} ratios={ratios}")
        )
    return outcome


def run_local_limit(config: EffectiveConfig, model: ModelConfig) -> Outcome:
    opts, seed, workers = config.experiment, config.run.seed, config.run.workers
    targets = compute_moment_targets(
        0, opts.target_n_disc, opts.target_budget, seed, workers, joint_times=opts.joint_times
    )
    table = local_limit_check(
        model, opts.levels, opts.n_list, opts.reps, seed, targets, opts.joint_times, opts.anchor_n, opts.cap, workers,
        bound_orders=opts.bound_orders,
    )
    outcome = Outcome(
        payload={"targets": targets.model_dump(), **table.summary},
        tables={"local-limit": table.to_frame()},
        provenance=_table_provenance(table),
    )
    if 2 in config.criteria:
        zero_rows = [r for r in table.rows if r.statistic.startswith("congruence_zero")]
        violations = int(table.summary["congruence_violations"]) + sum(r.value != 0 for r in zero_rows)
        outcome.criteria.append(Criterion.check(2, violations == 0, violations, 0.0))
    if 6 in config.criteria:
        level = next((a for a in opts.levels if all(model.admissible(n, a) for n in opts.n_list)), None)
        rows = table.select(f"scaled_probability_a{level}") if level is not None else []
        values = [r.value for r in rows]
        ratios = [b / a for a, b in zip(values, values[1:]) if a > 0]
        plateau = all(PLATEAU_RATIO_BAND[0] <= q <= PLATEAU_RATIO_BAND[1] for q in ratios)
        error = _relative_error(rows[-1].value, rows[-1].target) if rows and rows[-1].target else math.inf
        outcome.criteria.append(
            Criterion.check(6, plateau and error <= config.criteria[6], error, config.criteria[6], f"ratios={ratios}")
        )
    return outcome


def run_ratio(config: EffectiveConfig, model: ModelConfig) -> Outcome:
    opts, seed = config.experiment, config.run.seed
    observable = RatioObservable(h=opts.observable, g=opts.g, window=opts.window)
    table = ratio_ergodic_experiment(
        model, observable, max(opts.n_list), opts.paths, seed, checkpoints=opts.checkpoints or None
    )
    outcome = Outcome(payload=table.summary, tables={"ratio": table.to_frame()}, provenance=_table_provenance(table))
    if 11 in config.criteria:
        final = table.rows[-1]
        error = _relative_error(final.value, final.target)
        outcome.criteria.append(Criterion.check(11, error <= config.criteria[11], error, config.criteria[11], f"n={final.n}"))
    return outcome


def run_functional(config: EffectiveConfig, model: ModelConfig) -> Outcome:
    opts, seed, workers = config.experiment, config.run.seed, config.run.workers
    table = functional_limit_check(model, opts.n_list, opts.reps, opts.n_disc, seed, workers=workers)
    outcome = Outcome(payload=table.summary, tables={"functional": table.to_frame()}, provenance=_table_provenance(table))
    if 12 in config.criteria:
        statistics = [r.value for r in table.select("ks_statistic")]
        passed = len(statistics) >= 3 and is_strictly_decreasing(statistics)
        outcome.criteria.append(Criterion.check(12, passed, statistics[-1] if statistics else None, detail=f"ks={statistics}"))
    return outcome


EXPERIMENTS: Dict[str, Callable[[EffectiveConfig, ModelConfig], Outcome]] = {
    "model-check": run_model_check,
    "exact-dist": run_exact_dist,
    "batch": run_batch,
    "green-kubo": run_green_kubo,
    "brownian": run_brownian,
    "moments": run_moments,
    "lln": run_lln,
    "clt": run_clt,
    "local-limit": run_local_limit,
    "ratio": run_ratio,
    "functional": run_functional,
}


def run(
    config_path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Mapping[str, Any]]] = None,
) -> Tuple[ExperimentReport, List[Path]]:
    config = load_config(config_path, overrides)
    name = config.run.experiment
    if name not in EXPERIMENTS:
        raise UnknownExperiment(f"Unknown experiment {name!r}; expected one of {sorted(EXPERIMENTS)}")
    model = config.build_model()
    print(f">> Running {name} (seed={config.run.seed}, workers={config.run.workers})")

    start = time.perf_counter()
    outcome = EXPERIMENTS[name](config, model)
    elapsed = time.perf_counter() - start

    report = ExperimentReport(
        experiment=name,
        config_hash=config.config_hash(),
        seed=config.run.seed,
        config=config.canonical(),
        payload=outcome.payload,
        provenance=outcome.provenance,
        criteria=outcome.criteria,
    )
    out_dir = Path(config.run.out)
    paths = write_artifacts(report, outcome.tables, out_dir, timing={"seconds": elapsed}, raw=outcome.raw)
    for criterion in report.criteria:
        print(criterion.line())
    print(f">> Wrote {len(paths)} artifacts to {out_dir}")
    return report, paths

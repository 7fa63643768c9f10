"""Asymptotic variance of additive functionals of ``Z`` summed in d-blocks.

The lag covariance ``C(l) = sum_{a,b} f(a) f(b) P(Z_l = a - b)`` is grouped
into blocks ``B(k) = sum_{l'=0}^{d-1} C(|l' + d k|)``, ``k in Z``, and the
blocks are merged in the order ``0, -1, 1, -2, 2, ...``. Small lags are exact
(rational oracle); lags past the oracle cap are estimated from one shared set
of simulated trajectories.
"""

import logging
from collections import defaultdict
from fractions import Fraction
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import zeta

from rwrs.errors import ObservableNotCentered
from rwrs.lattice.model import ModelConfig
from rwrs.oracle.coefficients import A_coefficient_exact
from rwrs.oracle.exact import lag_covariance, observable_weights, oracle_cap
from rwrs.walks.batch import sample_levels
from rwrs.walks.engine import evaluate_observable

logger = logging.getLogger(__name__)

CENTERING_TOLERANCE = 1e-12


class BlockTerm(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int
    value: float
    source: str = Field(description="'exact' or 'mc'")
    stderr: float = 0.0
    lags: List[int]
    exact_value: Optional[str] = Field(default=None, description="Exact rational as 'p/q'.")


class GreenKuboResult(BaseModel):
    sigma2: float
    stderr: float
    blocks: List[BlockTerm]
    truncation_index: int
    tail_estimate: float
    tail_exponent: Optional[float] = None
    tail_constant: Optional[float] = None
    tolerance: float = Field(description="Numerical tolerance on sigma2 >= 0.")
    observable: Dict[int, float]
    centered: bool

    def block(self, k: int) -> BlockTerm:
        for term in self.blocks:
            if term.k == k:
                return term
        raise KeyError(f"Block {k} was not computed")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [{"k": b.k, "value": b.value, "source": b.source, "stderr": b.stderr} for b in self.blocks],
            columns=["k", "value", "source", "stderr"],
        )

    def summary(self) -> dict:
        return {
            "sigma2": self.sigma2,
            "stderr": self.stderr,
            "tail_estimate": self.tail_estimate,
            "tail_exponent": self.tail_exponent,
            "truncation_index": self.truncation_index,
            "centered": self.centered,
        }


def block_lags(model: ModelConfig, k: int) -> List[int]:
    d = model.periodicity.d
    return [abs(offset + d * k) for offset in range(d)]


def merge_order(horizon: int) -> Iterator[int]:
    """``0, -1, 1, -2, 2, ...`` up to ``|k| <= horizon``."""
    yield 0
    for size in range(1, horizon + 1):
        yield -size
        yield size


def covariance_kernel(f: Mapping[int, float]) -> Dict[int, float]:
    """``z -> sum_{a - b = z} f(a) f(b)``, so that ``C(l) = E[kernel(Z_l)]``."""
    weights = observable_weights(f)
    kernel: Dict[int, float] = defaultdict(float)
    for a, fa in weights.items():
        for b, fb in weights.items():
            kernel[a - b] += float(fa * fb)
    return dict(kernel)


def check_centered(f: Mapping[int, float], enforce: bool = True) -> bool:
    total = sum(float(w) for w in f.values())
    if abs(total) <= CENTERING_TOLERANCE:
        return True
    message = f"Observable sums to {total}; the Green-Kubo series diverges for non-centered f"
    if enforce:
        raise ObservableNotCentered(message)
    logger.warning(message)
    return False


def _format_fraction(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def exact_block(model: ModelConfig, f: Mapping[int, float], k: int, cap: Optional[int] = None) -> BlockTerm:
    lags = block_lags(model, k)
    value = sum((lag_covariance(model, f, lag, cap) for lag in lags), Fraction(0))
    return BlockTerm(
        k=k,
        value=float(value),
        source="exact",
        lags=lags,
        exact_value=_format_fraction(value) if isinstance(value, Fraction) else None,
    )


def _mc_lag_matrix(
    model: ModelConfig,
    f: Mapping[int, float],
    lags: Sequence[int],
    reps: int,
    seed: int,
    workers: int,
) -> np.ndarray:
    """Per-replicate ``kernel(Z_l)`` for every lag, from one set of trajectories."""
    kernel = covariance_kernel(f)
    times = sorted(set(lags))
    levels = sample_levels(
        model, max(times), reps, times=times, seed=seed, experiment="green_kubo/mc", workers=workers
    )
    values = evaluate_observable(kernel, levels)
    column = {lag: index for index, lag in enumerate(times)}
    return np.stack([values[:, column[lag]] for lag in lags], axis=1)


def _mc_block(k: int, lags: List[int], per_lag: Dict[int, np.ndarray]) -> BlockTerm:
    rows = np.sum(np.stack([per_lag[lag] for lag in lags], axis=1), axis=1)
    reps = len(rows)
    mean = float(np.sum(rows) / reps)
    stderr = float(np.std(rows, ddof=1) / np.sqrt(reps)) if reps > 1 else 0.0
    return BlockTerm(k=k, value=mean, source="mc", stderr=stderr, lags=lags)


def block_term(
    model: ModelConfig,
    f: Mapping[int, float],
    k: int,
    cap: Optional[int] = None,
    mc_budget: int = 10_000,
    seed: int = 0,
    workers: int = 1,
) -> BlockTerm:
    """Block ``k``; exact when all its lags are within the oracle cap."""
    lags = block_lags(model, k)
    if max(lags) <= oracle_cap(cap) and model.is_rational:
        return exact_block(model, f, k, cap)
    matrix = _mc_lag_matrix(model, f, lags, mc_budget, seed, workers)
    return _mc_block(k, lags, {lag: matrix[:, i] for i, lag in enumerate(lags)})


def fit_tail(blocks: Sequence[BlockTerm], horizon: int, min_points: int = 3) -> dict:
    """Fit ``|B(K) + B(-K)| ~ c K^-p`` over the last decade of ``K``.

    The tail ``sum_{K > horizon} c K^-p`` is ``inf`` when ``p <= 1`` and
    ``nan`` when there are too few nonzero points to fit.
    """
    by_k = {b.k: b.value for b in blocks}
    start = max(1, horizon // 10)
    ks, gs = [], []
    for size in range(start, horizon + 1):
        if size in by_k and -size in by_k:
            paired = abs(by_k[size] + by_k[-size])
            if paired > 0:
                ks.append(size)
                gs.append(paired)
    if len(ks) < min_points:
        return {"tail_estimate": float("nan"), "tail_exponent": None, "tail_constant": None}
    slope, intercept = np.polyfit(np.log(ks), np.log(gs), 1)
    exponent = float(-slope)
    constant = float(np.exp(intercept))
    if exponent <= 1:
        logger.warning("Tail exponent %.3f <= 1; the truncated tail is not summable", exponent)
        tail = float("inf")
    else:
        tail = float(constant * zeta(exponent, horizon + 1))
    return {"tail_estimate": tail, "tail_exponent": exponent, "tail_constant": constant}


def sigma2_f(
    model: ModelConfig,
    f: Mapping[int, float],
    exact_horizon: int = 4,
    mc_horizon: int = 0,
    mc_budget: int = 10_000,
    seed: int = 0,
    enforce_centered: bool = True,
    cap: Optional[int] = None,
    workers: int = 1,
) -> GreenKuboResult:
    centered = check_centered(f, enforce_centered)
    limit = oracle_cap(cap)
    horizon = max(exact_horizon, mc_horizon)
    order = list(merge_order(horizon))

    exact_ks, mc_ks = [], []
    for k in order:
        lags = block_lags(model, k)
        if abs(k) <= exact_horizon and max(lags) <= limit and model.is_rational:
            exact_ks.append(k)
        else:
            mc_ks.append(k)

    computed: Dict[int, BlockTerm] = {k: exact_block(model, f, k, cap) for k in exact_ks}
    total_rows = None
    if mc_ks:
        mc_lags = sorted({lag for k in mc_ks for lag in block_lags(model, k)})
        matrix = _mc_lag_matrix(model, f, mc_lags, mc_budget, seed, workers)
        per_lag = {lag: matrix[:, i] for i, lag in enumerate(mc_lags)}
        total_rows = np.zeros(mc_budget)
        for k in mc_ks:
            lags = block_lags(model, k)
            computed[k] = _mc_block(k, lags, per_lag)
            total_rows = total_rows + np.sum(np.stack([per_lag[lag] for lag in lags], axis=1), axis=1)

    blocks = [computed[k] for k in order]
    sigma2 = float(sum(b.value for b in blocks))
    stderr = 0.0
    if total_rows is not None and mc_budget > 1:
        stderr = float(np.std(total_rows, ddof=1) / np.sqrt(mc_budget))
    tolerance = max(4 * stderr, 1e-12)
    if sigma2 < -tolerance:
        logger.warning("sigma2 = %.6g is negative beyond tolerance %.2g", sigma2, tolerance)

    tail = fit_tail(blocks, horizon)
    logger.info("sigma2 = %.6g +- %.2g over |k| <= %d", sigma2, stderr, horizon)
    return GreenKuboResult(
        sigma2=sigma2,
        stderr=stderr,
        blocks=blocks,
        truncation_index=horizon,
        tolerance=tolerance,
        observable={int(a): float(w) for a, w in f.items()},
        centered=centered,
        **tail,
    )


def two_point_observable(a: int) -> Dict[int, int]:
    """``delta_0 - delta_a``."""
    f: Dict[int, int] = defaultdict(int)
    f[0] += 1
    f[a] -= 1
    return dict(f)


def sigma2_0a(model: ModelConfig, a: int = 1, **kwargs) -> GreenKuboResult:
    return sigma2_f(model, two_point_observable(a), **kwargs)


def paired_lag_sum(model: ModelConfig, f: Mapping[int, float], horizon: int, cap: Optional[int] = None):
    """``C(0) + 2 sum_{l=1}^{horizon} C(l)``."""
    total = lag_covariance(model, f, 0, cap)
    for lag in range(1, horizon + 1):
        total += 2 * lag_covariance(model, f, lag, cap)
    return total


def sigma2_from_a_coefficients(
    model: ModelConfig, f: Mapping[int, float], horizon: int, k: int = 0, cap: Optional[int] = None
) -> Union[Fraction, float]:
    """``sum_{k' < d} sum_{l <= horizon} 2^{1[l > 0]} A_{k + k', l}``.

    Summing ``A`` over a full set of residues recovers ``C(l)``, so this equals
    :func:`paired_lag_sum` exactly.
    """
    total = Fraction(0)
    for shift in range(model.periodicity.d):
        for lag in range(horizon + 1):
            weight = 2 if lag > 0 else 1
            total += weight * A_coefficient_exact(model, f, k + shift, lag, cap)
    return total


def horizon_stability(
    model: ModelConfig, f: Mapping[int, float], mc_horizon: int, growth: float = 1.5, **kwargs
) -> dict:
    """Relative change of ``sigma2`` when ``mc_horizon`` grows by ``growth``."""
    base = sigma2_f(model, f, mc_horizon=mc_horizon, **kwargs)
    extended = sigma2_f(model, f, mc_horizon=int(np.ceil(mc_horizon * growth)), **kwargs)
    change = abs(extended.sigma2 - base.sigma2) / abs(base.sigma2) if base.sigma2 else float("inf")
    return {"base": base, "extended": extended, "relative_change": float(change)}

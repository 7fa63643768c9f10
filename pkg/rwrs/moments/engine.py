import logging
import math
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy.special import gammaln

from rwrs.brownian.gram import gram_det
from rwrs.brownian.local_time import sample_grids
from rwrs.errors import DegenerateInput, InvalidBudget, MissingComponents
from rwrs.moments.simplex import (
    ZERO_VARIANCE_CONCENTRATION,
    dirichlet_times,
    ordered_simplex_constant,
    simplex_closed_form,
)
from rwrs.walks.parallel import map_replicates, summarize
from rwrs.walks.streams import StreamId, generator

logger = logging.getLogger(__name__)

MIN_SEGMENT_STEPS = 8
MAX_EXCLUDED_FRACTION = 0.01


class SandwichBounds(BaseModel):
    m: int
    lower: float
    upper: float
    lower_stderr: float = 0.0
    upper_stderr: float = 0.0
    upper_is_proxy: bool = Field(
        default=True, description="The upper side uses the V_j family in place of the sup over subspaces."
    )

    def contains(self, value: float, stderr: float = 0.0, inflation: float = 3.0) -> bool:
        lower_slack = inflation * math.hypot(stderr, self.lower_stderr)
        upper_slack = inflation * math.hypot(stderr, self.upper_stderr)
        return self.lower - lower_slack <= value <= self.upper + upper_slack


class MomentEstimate(BaseModel):
    m: int
    value: float
    stderr: float
    simplex_factor: float = Field(description="m! Gamma(1/4)^m / Gamma(m/4 + 1).")
    det_moment: float = Field(description="Weighted mean of det D^{-1/2} over the sampled times.")
    sigma_xi: float
    samples: int
    excluded: int = 0
    excluded_fraction: float = 0.0
    rescaled: int = Field(default=0, description="Gaps shorter than the grid, resolved by scaling.")
    sandwich: Optional[SandwichBounds] = None


def gaussian_scale(m: int, sigma_xi: float) -> float:
    """``1 / (2 pi sigma_xi^2)^{m/2}``."""
    return (2 * math.pi * sigma_xi ** 2) ** (-m / 2)


def _unit_inverse_norm(n_disc: int, rng: np.random.Generator) -> float:
    norm_sq = sample_grids(n_disc, [1.0], rng)[0].l2_norm_sq()
    return norm_sq ** -0.5 if norm_sq > 0 else np.inf


def weighted_inverse_sqrt_det(
    times: np.ndarray, gaps: np.ndarray, n_disc: int, rng: np.random.Generator
) -> Tuple[float, int]:
    """One draw of ``det D_t^{-1/2} prod gaps^{3/4}`` and the number of rescaled gaps.

    A gap covering fewer than ``MIN_SEGMENT_STEPS`` grid steps is not
    resolved on the path. Its local-time increment is an independent
    unit-time profile scaled by ``gap^{3/4}`` in norm and concentrated near a
    single point, so it is taken orthogonal to the other increments: the
    determinant factorises and the gap's weight cancels against its norm.
    Returns ``nan`` when the resolved part is still degenerate.
    """
    steps = np.floor(times * n_disc).astype(np.int64)
    segment_steps = np.diff(np.concatenate(([0], steps)))
    short = segment_steps < MIN_SEGMENT_STEPS
    value = float(np.prod(gaps[~short] ** 0.75))
    if np.any(~short):
        sample = gram_det(sample_grids(n_disc, times[~short], rng))
        if sample.det <= 0:
            return np.nan, int(np.count_nonzero(short))
        value *= sample.det ** -0.5
    for _ in range(int(np.count_nonzero(short))):
        value *= _unit_inverse_norm(n_disc, rng)
    return value, int(np.count_nonzero(short))


def _ks_chunk(
    m: int, path_budget: int, n_disc: int, seed: int, experiment: str, start: int, stop: int
) -> np.ndarray:
    """Per time tuple: mean over paths of the weighted draw, and the excluded and rescaled counts."""
    out = np.empty((stop - start, 3))
    for offset, replicate in enumerate(range(start, stop)):
        rng = generator(StreamId(seed=seed, experiment=experiment, replicate=replicate))
        times, gaps = dirichlet_times(m, 1, rng, ZERO_VARIANCE_CONCENTRATION)
        values = []
        excluded = rescaled = 0
        for _ in range(path_budget):
            value, short = weighted_inverse_sqrt_det(times[0], gaps[0], n_disc, rng)
            rescaled += short
            if not np.isfinite(value):
                excluded += 1
                continue
            values.append(value)
        out[offset] = (np.mean(values) if values else np.nan, excluded, rescaled)
    return out


def ks_local_time_moment(
    m: int,
    sigma_xi: float = 1.0,
    simplex_budget: int = 1000,
    path_budget: int = 1,
    n_disc: int = 4096,
    seed: int = 0,
    experiment: str = "moments/ks",
    workers: int = 1,
    max_excluded_fraction: float = MAX_EXCLUDED_FRACTION,
) -> MomentEstimate:
    """``m! / (2 pi sigma_xi^2)^{m/2} int_{ordered} E[det D_t^{-1/2}] dt``.

    Ordered times are drawn with ``Dirichlet(1/4, ..., 1/4, 1)`` gaps, which
    absorbs the ``prod gaps^{-3/4}`` singularity of the integrand. With
    ``sigma_xi = 1`` this is ``E[L_1(0)^m]`` for the local time of ``Delta``.
    Gaps below the grid are rescaled (see :func:`weighted_inverse_sqrt_det`);
    draws that remain degenerate are excluded, and more than
    ``max_excluded_fraction`` of them raises ``DegenerateInput``.
    """
    if m < 1:
        raise ValueError(f"m must be at least 1, got {m}")
    if path_budget < 1 or simplex_budget < 1:
        raise InvalidBudget(
            f"Budgets must be at least 1, got simplex_budget={simplex_budget} path_budget={path_budget}"
        )
    out = map_replicates(
        _ks_chunk, (m, path_budget, n_disc, seed, experiment), simplex_budget, workers=workers, desc=experiment
    )
    per_tuple = out[:, 0]
    excluded = int(np.sum(out[:, 1]))
    rescaled = int(np.sum(out[:, 2]))
    draws = simplex_budget * path_budget
    excluded_fraction = excluded / draws
    if excluded:
        logger.warning("m=%d: excluded %d of %d degenerate Gram draws", m, excluded, draws)
    if excluded_fraction > max_excluded_fraction:
        raise DegenerateInput(
            f"m={m}: {excluded_fraction:.1%} of Gram draws are degenerate at n_disc={n_disc}, "
            f"above {max_excluded_fraction:.1%}; increase n_disc"
        )
    finite = per_tuple[np.isfinite(per_tuple)]
    if len(finite) == 0:
        raise InvalidBudget("Every sample was degenerate; increase n_disc")
    mean, _, stderr = summarize(finite)
    factor = math.factorial(m) * ordered_simplex_constant(m) * gaussian_scale(m, sigma_xi)
    return MomentEstimate(
        m=m,
        value=factor * mean,
        stderr=factor * stderr,
        simplex_factor=simplex_closed_form(m),
        det_moment=mean,
        sigma_xi=sigma_xi,
        samples=len(finite),
        excluded=excluded,
        excluded_fraction=excluded_fraction,
        rescaled=rescaled,
    )


def _relative(stderr: Optional[float], value: float) -> float:
    return 0.0 if not stderr else stderr / value


def moment_sandwich(
    m: int,
    sigma_xi: float,
    inverse_norm: Optional[float],
    vk_inverse: Optional[Mapping[int, float]] = None,
    inverse_norm_stderr: float = 0.0,
    vk_stderr: Optional[Mapping[int, float]] = None,
) -> SandwichBounds:
    """Lower and (proxy) upper bounds for ``E[L_1(0)^m]``.

    ``inverse_norm`` estimates ``E[|L_1|^{-1}]``; ``vk_inverse[j]`` estimates
    ``E[d(L_1, V_j)^{-1}]`` for ``1 <= j < m`` (``V_0 = {0}`` reuses
    ``inverse_norm``).
    """
    if m < 1:
        raise ValueError(f"m must be at least 1, got {m}")
    vk_inverse = dict(vk_inverse or {})
    vk_stderr = dict(vk_stderr or {})
    if inverse_norm is None:
        raise MissingComponents("E[|L_1|^{-1}] is required")
    missing = [j for j in range(1, m) if j not in vk_inverse]
    if missing:
        raise MissingComponents(f"Missing V_j inverse-distance estimates for j in {missing}")
    factors = [inverse_norm] + [vk_inverse[j] for j in range(1, m)]
    rel = [_relative(inverse_norm_stderr, inverse_norm)] + [
        _relative(vk_stderr.get(j), vk_inverse[j]) for j in range(1, m)
    ]
    scale = simplex_closed_form(m) * gaussian_scale(m, sigma_xi)
    lower = inverse_norm ** m * scale
    upper = float(np.prod(factors)) * scale
    return SandwichBounds(
        m=m,
        lower=lower,
        upper=upper,
        lower_stderr=lower * m * rel[0],
        upper_stderr=upper * math.sqrt(sum(r * r for r in rel)),
        upper_is_proxy=m > 1,
    )


def log_moment_upper_envelope(m: int, a: float = 1.0, eta0: float = 0.01) -> float:
    return float(m * math.log(a) + (1.5 + eta0) * math.lgamma(m + 1) - gammaln(m / 4 + 1))


def moment_upper_envelope(m: int, a: float = 1.0, eta0: float = 0.01) -> float:
    """``a^m (m!)^{3/2 + eta0} / Gamma(m/4 + 1)``."""
    return float(np.exp(log_moment_upper_envelope(m, a, eta0)))


def moment_lower_envelope(m: int, c: float = 1.0) -> float:
    """``(c m)^{3m/4}``."""
    return float((c * m) ** (0.75 * m))


def rate_exponent(ms: Sequence[int], values: Sequence[float]) -> float:
    """Slope of ``log(value) / m`` against ``log m``; ``3/4`` for ``(c m)^{3m/4}``."""
    ms = np.asarray(ms, dtype=float)
    per_order = np.log(np.asarray(values, dtype=float)) / ms
    slope, _ = np.polyfit(np.log(ms), per_order, 1)
    return float(slope)


class CarlemanSeries(BaseModel):
    terms: List[float]
    partial_sums: List[float]
    companion_sums: List[float]
    eta0: float

    @property
    def total(self) -> float:
        return self.partial_sums[-1] if self.partial_sums else 0.0

    def growth_exponent(self, start: int = 1) -> float:
        """Log-log slope of the partial sums against ``M`` from ``M = start`` on."""
        ms = np.arange(1, len(self.partial_sums) + 1)[start - 1:]
        sums = np.asarray(self.partial_sums)[start - 1:]
        slope, _ = np.polyfit(np.log(ms), np.log(sums), 1)
        return float(slope)


def carleman_partial(values: Sequence[float], eta0: float = 0.01, log_scale: bool = False) -> CarlemanSeries:
    """Partial sums of ``sum_m value(m)^{-1/(2m)}`` over ``m = 1, 2, ...``.

    With ``log_scale`` the inputs are ``log value(m)``. The companion series
    is ``sum_m m^{-5/8 - eta0}``.
    """
    values = np.asarray(values, dtype=float)
    if len(values) == 0:
        return CarlemanSeries(terms=[], partial_sums=[], companion_sums=[], eta0=eta0)
    if not log_scale and np.any(values <= 0):
        raise ValueError("Carleman terms need positive values")
    ms = np.arange(1, len(values) + 1, dtype=float)
    logs = values if log_scale else np.log(values)
    terms = np.exp(-logs / (2 * ms))
    return CarlemanSeries(
        terms=terms.tolist(),
        partial_sums=np.cumsum(terms).tolist(),
        companion_sums=np.cumsum(ms ** (-0.625 - eta0)).tolist(),
        eta0=eta0,
    )


def envelope_carleman(max_m: int, a: float = 1.0, eta0: float = 0.01) -> CarlemanSeries:
    logs = [log_moment_upper_envelope(m, a, eta0) for m in range(1, max_m + 1)]
    return carleman_partial(logs, eta0=eta0, log_scale=True)


def sandwich_table(
    ms: Sequence[int],
    sigma_xi: float,
    inverse_norm: float,
    vk_inverse: Mapping[int, float],
    **kwargs,
) -> Dict[int, SandwichBounds]:
    return {m: moment_sandwich(m, sigma_xi, inverse_norm, vk_inverse, **kwargs) for m in ms}


def lower_sandwich_growth(ms: Sequence[int], sigma_xi: float, inverse_norm: float) -> Tuple[List[float], float]:
    """Lower sandwich values and their :func:`rate_exponent`."""
    lowers = [inverse_norm ** m * simplex_closed_form(m) * gaussian_scale(m, sigma_xi) for m in ms]
    return lowers, rate_exponent(ms, lowers)

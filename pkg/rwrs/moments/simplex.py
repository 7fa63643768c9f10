"""Closed forms and quadrature for the singular simplex integral

    int_{[0,1]^m} prod_k |t_(k) - t_(k-1)|^{-3/4} dt = m! Gamma(1/4)^m / Gamma(m/4 + 1),

where ``t_(k)`` are the order statistics and ``t_(0) = 0``.
"""

import logging
import math
from fractions import Fraction
from typing import Tuple

import numpy as np
from pydantic import BaseModel
from scipy.special import gammaln

from rwrs.errors import InvalidBudget
from rwrs.walks.parallel import map_replicates, summarize
from rwrs.walks.streams import StreamId, generator

logger = logging.getLogger(__name__)

GAMMA_QUARTER = 3.6256099082219083119
ZERO_VARIANCE_CONCENTRATION = 0.25
DEFAULT_CONCENTRATION = 0.35
SAMPLE_CHUNK = 1 << 16
# m! Gamma(1/4)^m overflows a double a little past m = 140
DIRECT_LIMIT = 120

_GAMMA_AT_QUARTERS = {
    Fraction(1, 4): GAMMA_QUARTER,
    Fraction(1, 2): math.sqrt(math.pi),
    Fraction(3, 4): math.pi * math.sqrt(2.0) / GAMMA_QUARTER,
    Fraction(1): 1.0,
}


def quarter_gamma_parts(m: int) -> Tuple[Fraction, Fraction]:
    """Write ``Gamma(m/4 + 1) = c * Gamma(r)`` with exact ``c`` and ``r in {1/4, 1/2, 3/4, 1}``."""
    x = Fraction(m + 4, 4)
    r = x - math.ceil(x) + 1
    coefficient = Fraction(1)
    value = r
    while value < x:
        coefficient *= value
        value += 1
    return coefficient, r


def gamma_quarter_point(m: int) -> float:
    coefficient, r = quarter_gamma_parts(m)
    return float(coefficient) * _GAMMA_AT_QUARTERS[r]


def log_simplex_closed_form(m: int) -> float:
    return float(math.lgamma(m + 1) + m * math.log(GAMMA_QUARTER) - gammaln(m / 4 + 1))


def simplex_closed_form(m: int) -> float:
    if m < 0:
        raise ValueError(f"m must be non-negative, got {m}")
    if m > DIRECT_LIMIT:
        return float(np.exp(log_simplex_closed_form(m)))
    coefficient, r = quarter_gamma_parts(m)
    scale = Fraction(math.factorial(m)) / coefficient
    if r == Fraction(1, 4):
        # one Gamma(1/4) cancels
        return float(scale) * GAMMA_QUARTER ** (m - 1)
    return float(scale) * GAMMA_QUARTER ** m / _GAMMA_AT_QUARTERS[r]


def ordered_simplex_constant(m: int) -> float:
    """``Gamma(1/4)^m / Gamma(m/4 + 1)``, the integral over ordered times."""
    return simplex_closed_form(m) / math.factorial(m)


def beta_recursion_residuals(max_m: int = 40) -> np.ndarray:
    """Relative gaps in ``a_{m+1} = a_m Gamma(1/4) Gamma(m/4 + 1) / Gamma((m+1)/4 + 1)``."""
    residuals = []
    for m in range(max_m):
        a_m = ordered_simplex_constant(m)
        a_next = ordered_simplex_constant(m + 1)
        predicted = a_m * GAMMA_QUARTER * gamma_quarter_point(m) / gamma_quarter_point(m + 1)
        residuals.append(abs(predicted - a_next) / a_next)
    return np.asarray(residuals)


class SimplexEstimate(BaseModel):
    m: int
    estimate: float
    stderr: float
    samples: int
    concentration: float
    closed_form: float

    @property
    def relative_error(self) -> float:
        return abs(self.estimate - self.closed_form) / self.closed_form


def dirichlet_times(m: int, size: int, rng: np.random.Generator, concentration: float) -> Tuple[np.ndarray, np.ndarray]:
    """Ordered times from ``Dirichlet(c, ..., c, 1)`` gaps; returns ``(times, gaps)``."""
    gaps = rng.dirichlet([concentration] * m + [1.0], size=size)[:, :m]
    return np.cumsum(gaps, axis=1), gaps


def _simplex_chunk(m: int, concentration: float, seed: int, experiment: str, start: int, stop: int) -> np.ndarray:
    rng = generator(StreamId(seed=seed, experiment=experiment, replicate=start))
    _, gaps = dirichlet_times(m, stop - start, rng, concentration)
    log_norm = m * math.lgamma(concentration) - math.lgamma(m * concentration + 1)
    log_weight = log_norm + (0.25 - concentration) * np.sum(np.log(gaps), axis=1)
    return math.factorial(m) * np.exp(log_weight)


def simplex_integral_mc(
    m: int,
    samples: int,
    seed: int,
    concentration: float = DEFAULT_CONCENTRATION,
    experiment: str = "moments/simplex",
    workers: int = 1,
) -> SimplexEstimate:
    """Importance-sampling estimate of :func:`simplex_closed_form`.

    With ``concentration = 1/4`` every weight equals the closed form. The
    variance is finite only for ``concentration < 1/2``.
    """
    if samples < 1:
        raise InvalidBudget(f"samples must be at least 1, got {samples}")
    if m < 1:
        raise ValueError(f"m must be at least 1, got {m}")
    weights = map_replicates(
        _simplex_chunk,
        (m, concentration, seed, experiment),
        samples,
        workers=workers,
        chunk_size=SAMPLE_CHUNK,
        desc=experiment,
    )
    estimate, _, stderr = summarize(weights)
    return SimplexEstimate(
        m=m,
        estimate=estimate,
        stderr=stderr,
        samples=samples,
        concentration=concentration,
        closed_form=simplex_closed_form(m),
    )

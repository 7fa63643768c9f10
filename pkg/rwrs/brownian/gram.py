import logging
from typing import List, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import linalg

from rwrs.brownian.local_time import LocalTimeGrid
from rwrs.errors import DegenerateInput

logger = logging.getLogger(__name__)

PIVOT_TOLERANCE = 1e-12
PSD_TOLERANCE = 1e-9


class GramSample(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    times: List[float]
    matrix: np.ndarray
    det: float
    distances: List[float]
    clamped: int = 0

    @property
    def sqrt_det(self) -> float:
        return float(np.sqrt(self.det))

    def is_psd(self) -> bool:
        trace = float(np.trace(self.matrix))
        eigenvalues = np.linalg.eigvalsh(self.matrix)
        return bool(np.all(eigenvalues >= -PSD_TOLERANCE * trace))


def profile_matrix(grids: Sequence[LocalTimeGrid]) -> np.ndarray:
    """Rows are the profiles on a common site range, scaled by ``sqrt(spacing)``.

    Then ``P @ P.T`` is the matrix of ``L^2`` inner products.
    """
    if not grids:
        raise DegenerateInput("No local-time grids given")
    spacing = grids[0].spacing
    if any(g.spacing != spacing for g in grids):
        raise DegenerateInput("Grids have different spacings")
    lo = min(g.origin for g in grids)
    hi = max(g.origin + len(g.values) for g in grids)
    matrix = np.zeros((len(grids), hi - lo))
    for row, g in enumerate(grids):
        start = g.origin - lo
        matrix[row, start:start + len(g.values)] = g.values
    return matrix * np.sqrt(spacing)


def gram_det(grids: Sequence[LocalTimeGrid]) -> GramSample:
    """Gram determinant of the profiles.

    Computed from a QR factorisation of the scaled profile matrix, where
    ``|R_jj|`` is the distance of profile ``j`` to the span of the earlier
    ones. Diagonal entries below ``1e-12 * trace^{1/2}`` are set to zero.
    """
    profiles = profile_matrix(grids)
    gram = profiles @ profiles.T
    gram = 0.5 * (gram + gram.T)
    r = linalg.qr(profiles.T, mode="r")[0]
    diagonal = np.zeros(len(grids))
    pivots = np.abs(np.diag(r))[: len(grids)]
    # fewer sites than profiles: the trailing pivots are zero
    diagonal[: len(pivots)] = pivots
    threshold = PIVOT_TOLERANCE * np.sqrt(max(float(np.trace(gram)), 0.0))
    small = diagonal <= threshold
    clamped = int(np.count_nonzero(small))
    if clamped:
        logger.debug("Clamped %d Gram pivots below %.3g", clamped, threshold)
        diagonal = np.where(small, 0.0, diagonal)
    return GramSample(
        times=[g.effective_time for g in grids],
        matrix=gram,
        det=float(np.prod(diagonal ** 2)),
        distances=[float(x) for x in diagonal],
        clamped=clamped,
    )


def distance_to_span(target: LocalTimeGrid, basis: Sequence[LocalTimeGrid]) -> float:
    """``L^2`` distance from ``target`` to the span of ``basis`` by least squares."""
    if not basis:
        return float(np.sqrt(target.l2_norm_sq()))
    profiles = profile_matrix([*basis, target])
    a, b = profiles[:-1].T, profiles[-1]
    coefficients = np.linalg.lstsq(a, b, rcond=None)[0]
    return float(np.linalg.norm(b - a @ coefficients))


def gram_recursion_residuals(grids: Sequence[LocalTimeGrid]) -> np.ndarray:
    """Relative gaps ``|det_{j+1}^{1/2} - det_j^{1/2} d_j| / det_{j+1}^{1/2}``.

    ``d_j`` is the distance of profile ``j`` to the span of the earlier ones,
    computed independently of the factorisation. Entries where the larger
    determinant vanishes are ``nan``.
    """
    residuals = []
    for j in range(1, len(grids)):
        upper = gram_det(grids[: j + 1]).sqrt_det
        lower = gram_det(grids[:j]).sqrt_det
        distance = distance_to_span(grids[j], grids[:j])
        if upper == 0:
            residuals.append(np.nan)
        else:
            residuals.append(abs(upper - lower * distance) / upper)
    return np.asarray(residuals, dtype=np.float64)

"""Exact laws of ``Z_k`` by enumeration over walk paths.

Paths are folded into ``(position, visit profile)`` states after every step.
States are stored relative to the current position, so translated states
merge. Once the last time is reached, only the multiset of per-site count
vectors matters: ``(Z_{t_1}, ..., Z_{t_j}) = sum_y xi_y (N_{t_1}(y), ...,
N_{t_j}(y))``. Each distinct multiset is convolved with the scenery law once.
"""

import itertools
import logging
import math
import os
from collections import defaultdict
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from rwrs.errors import CapExceeded, NonRationalModel
from rwrs.lattice.model import LatticePmf, ModelConfig

logger = logging.getLogger(__name__)

DEFAULT_CAP = 20

Atoms = Tuple[Tuple[int, Fraction], ...]
CountVector = Tuple[int, ...]
JointLaw = Dict[Tuple[int, ...], Fraction]


def oracle_cap(cap: Union[int, None] = None) -> int:
    if cap is not None:
        return int(cap)
    return int(os.getenv("RWRS_ORACLE_CAP", DEFAULT_CAP))


class ExactPmf(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    atoms: Dict[int, Fraction] = Field(description="value -> exact mass, zero masses omitted")
    k: int

    def mass(self, value: int) -> Fraction:
        return self.atoms.get(value, Fraction(0))

    def total(self) -> Fraction:
        return sum(self.atoms.values(), Fraction(0))

    @property
    def support(self) -> List[int]:
        return sorted(self.atoms)

    def is_symmetric(self) -> bool:
        return all(self.mass(-value) == mass for value, mass in self.atoms.items())

    def as_float(self) -> Dict[int, float]:
        return {value: float(self.atoms[value]) for value in self.support}

    def to_rows(self) -> List[dict]:
        return [
            {
                "value": value,
                "numerator": self.atoms[value].numerator,
                "denominator": self.atoms[value].denominator,
            }
            for value in self.support
        ]


def _exact_atoms(pmf: LatticePmf, name: str) -> Atoms:
    if not pmf.is_rational:
        raise NonRationalModel(f"The {name} pmf has floating-point masses; the oracle needs rationals")
    return tuple((int(value), Fraction(mass)) for value, mass in pmf.atoms)


def _check_request(model: ModelConfig, times: Sequence[int], cap: Union[int, None]) -> Tuple[int, ...]:
    times = tuple(int(t) for t in times)
    if not times:
        raise ValueError("At least one time index is required")
    if any(t < 0 for t in times) or any(b < a for a, b in zip(times, times[1:])):
        raise ValueError(f"Times must be non-negative and ascending, got {times}")
    limit = oracle_cap(cap)
    if times[-1] > limit:
        raise CapExceeded(f"Time {times[-1]} exceeds the oracle cap {limit}")
    return times


def _visit_vector(step_index: int, times: Tuple[int, ...]) -> CountVector:
    return tuple(1 if step_index < t else 0 for t in times)


def _add(u: CountVector, v: CountVector) -> CountVector:
    return tuple(a + b for a, b in zip(u, v))


def _profile_law(step: Atoms, times: Tuple[int, ...]) -> Dict[Tuple[CountVector, ...], Fraction]:
    """Probability of each multiset of per-site count vectors."""
    horizon = times[-1]
    # key: sorted ((site - position, count vector), ...)
    states: Dict[tuple, Fraction] = {(): Fraction(1)}
    for s in range(horizon):
        increment = _visit_vector(s, times)
        visited: Dict[tuple, Fraction] = defaultdict(Fraction)
        for key, prob in states.items():
            profile = dict(key)
            profile[0] = _add(profile[0], increment) if 0 in profile else increment
            visited[tuple(sorted(profile.items()))] += prob
        if s == horizon - 1:
            states = visited
            break
        moved: Dict[tuple, Fraction] = defaultdict(Fraction)
        for key, prob in visited.items():
            for x, p in step:
                shifted = tuple((site - x, vec) for site, vec in key)
                moved[shifted] += prob * p
        states = moved
    profiles: Dict[Tuple[CountVector, ...], Fraction] = defaultdict(Fraction)
    for key, prob in states.items():
        profiles[tuple(sorted(vec for _, vec in key))] += prob
    logger.debug("times=%s: %d states, %d profiles", times, len(states), len(profiles))
    return profiles


def _convolve(scenery: Atoms, vectors: Iterable[CountVector], width: int) -> JointLaw:
    law: JointLaw = {(0,) * width: Fraction(1)}
    for vec in vectors:
        nxt: JointLaw = defaultdict(Fraction)
        for point, prob in law.items():
            for x, q in scenery:
                nxt[tuple(p + x * c for p, c in zip(point, vec))] += prob * q
        law = nxt
    return dict(law)


@lru_cache(maxsize=256)
def _cached_joint_law(step: Atoms, scenery: Atoms, times: Tuple[int, ...]) -> Tuple[Tuple[Tuple[int, ...], Fraction], ...]:
    width = len(times)
    convolved = lru_cache(maxsize=None)(lambda profile: _convolve(scenery, profile, width))
    law: JointLaw = defaultdict(Fraction)
    for profile, weight in _profile_law(step, times).items():
        for point, prob in convolved(profile).items():
            law[point] += weight * prob
    return tuple(sorted((point, mass) for point, mass in law.items() if mass))


def exact_joint_law(model: ModelConfig, times: Sequence[int], cap: Union[int, None] = None) -> JointLaw:
    times = _check_request(model, times, cap)
    step = _exact_atoms(model.step, "step")
    scenery = _exact_atoms(model.scenery, "scenery")
    return dict(_cached_joint_law(step, scenery, times))


def naive_joint_law(model: ModelConfig, times: Sequence[int], cap: Union[int, None] = None) -> JointLaw:
    """Per-path enumeration without any grouping; the reference for the grouped version."""
    times = _check_request(model, times, cap)
    step = _exact_atoms(model.step, "step")
    scenery = _exact_atoms(model.scenery, "scenery")
    horizon = times[-1]
    law: JointLaw = defaultdict(Fraction)
    for path in itertools.product(step, repeat=max(horizon - 1, 0)):
        prob = Fraction(1)
        position = 0
        counts: Dict[int, CountVector] = {}
        for s in range(horizon):
            increment = _visit_vector(s, times)
            counts[position] = _add(counts[position], increment) if position in counts else increment
            if s < horizon - 1:
                x, p = path[s]
                position += x
                prob *= p
        for point, mass in _convolve(scenery, counts.values(), len(times)).items():
            law[point] += prob * mass
    return {point: mass for point, mass in law.items() if mass}


def exact_Z_pmf(model: ModelConfig, k: int, cap: Union[int, None] = None) -> ExactPmf:
    law = exact_joint_law(model, [k], cap)
    return ExactPmf(atoms={point[0]: mass for point, mass in sorted(law.items())}, k=k)


def exact_joint_prob(
    model: ModelConfig, times: Sequence[int], values: Sequence[int], cap: Union[int, None] = None
) -> Fraction:
    if len(times) != len(values):
        raise ValueError(f"Got {len(times)} times but {len(values)} values")
    law = exact_joint_law(model, times, cap)
    return law.get(tuple(int(v) for v in values), Fraction(0))


def _coerce_weight(weight) -> Union[Fraction, float]:
    if isinstance(weight, Fraction):
        return weight
    if isinstance(weight, (int, np.integer)) and not isinstance(weight, bool):
        return Fraction(int(weight))
    return float(weight)


def observable_weights(f: Mapping[int, float]) -> Dict[int, Union[Fraction, float]]:
    return {int(a): _coerce_weight(w) for a, w in f.items() if w}


def lag_covariance(model: ModelConfig, f: Mapping[int, float], lag: int, cap: Union[int, None] = None):
    """``sum_{a,b} f(a) f(b) P(Z_lag = a - b)``; exact when ``f`` is."""
    weights = observable_weights(f)
    if not weights:
        return Fraction(0)
    pmf = exact_Z_pmf(model, abs(lag), cap)
    total = Fraction(0)
    for a, fa in weights.items():
        for b, fb in weights.items():
            total += fa * fb * pmf.mass(a - b)
    return total


def total_variation(empirical, exact: ExactPmf) -> float:
    """Total-variation distance between samples (or value counts) and an exact pmf."""
    if isinstance(empirical, Mapping):
        counts = {int(v): int(c) for v, c in empirical.items()}
    else:
        values, freq = np.unique(np.asarray(empirical, dtype=np.int64), return_counts=True)
        counts = {int(v): int(c) for v, c in zip(values, freq)}
    size = sum(counts.values())
    if size == 0:
        raise ValueError("No empirical samples")
    support = set(counts) | set(exact.atoms)
    return 0.5 * float(
        sum(abs(counts.get(v, 0) / size - float(exact.mass(v))) for v in support)
    )


def scaled_joint_sup(model: ModelConfig, gaps: Sequence[int], cap: Union[int, None] = None) -> float:
    """``max_a prod_j n_j^{3/4} P(Z_{n_1} = a_1, ..., Z_{n_1 + ... + n_k} = a_k)`` for gaps ``n_j``.

    Bounded in the gaps for every fixed ``k``; the local-limit experiment
    tabulates it against growing equal gaps.
    """
    if not gaps or any(int(g) < 1 for g in gaps):
        raise ValueError(f"Gaps must be positive, got {list(gaps)}")
    times = list(itertools.accumulate(int(g) for g in gaps))
    law = exact_joint_law(model, times, cap)
    scale = math.prod(int(g) ** 0.75 for g in gaps)
    return scale * float(max(law.values()))

import logging
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from rwrs.errors import InvalidPmf, NotCentered, SupportDoesNotGenerateZ, ZeroVariance

logger = logging.getLogger(__name__)

Mass = Union[Fraction, float]

FLOAT_TOLERANCE = 1e-12


def _coerce_mass(mass) -> Mass:
    if isinstance(mass, (Fraction, float)):
        return mass
    if isinstance(mass, int) and not isinstance(mass, bool):
        return Fraction(mass)
    if isinstance(mass, str):
        return Fraction(mass)
    if isinstance(mass, np.floating):
        return float(mass)
    raise InvalidPmf(f"Unsupported mass type {type(mass).__name__!r}")


class LatticePmf(BaseModel):
    """Finite-support probability mass function on the integers.

    Masses are either exact rationals (``Fraction``) or doubles. Structural
    validity is checked by :func:`check_pmf`, which every constructor helper
    calls.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    atoms: Tuple[Tuple[int, Mass], ...] = Field(
        description="(value, mass) pairs sorted by value."
    )

    @field_validator("atoms", mode="before")
    @classmethod
    def _normalise_atoms(cls, atoms):
        pairs = [(int(value), _coerce_mass(mass)) for value, mass in atoms]
        return tuple(sorted(pairs, key=lambda pair: pair[0]))

    @classmethod
    def from_mapping(cls, masses: Dict[int, Mass]) -> "LatticePmf":
        pmf = cls(atoms=tuple(masses.items()))
        check_pmf(pmf)
        return pmf

    @classmethod
    def from_triples(cls, triples: Iterable[Sequence[int]]) -> "LatticePmf":
        """Build from ``(value, numerator, denominator)`` triples."""
        atoms = []
        for triple in triples:
            if len(triple) != 3:
                raise InvalidPmf(f"Expected (value, numerator, denominator), got {triple!r}")
            value, numerator, denominator = (int(x) for x in triple)
            if denominator == 0:
                raise InvalidPmf(f"Zero denominator for value {value}")
            atoms.append((value, Fraction(numerator, denominator)))
        pmf = cls(atoms=tuple(atoms))
        check_pmf(pmf)
        return pmf

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(value for value, _ in self.atoms)

    @property
    def masses(self) -> Tuple[Mass, ...]:
        return tuple(mass for _, mass in self.atoms)

    @property
    def probabilities(self) -> np.ndarray:
        probs = np.array([float(mass) for mass in self.masses], dtype=np.float64)
        return probs / probs.sum()

    @property
    def is_rational(self) -> bool:
        return all(isinstance(mass, Fraction) for mass in self.masses)

    @property
    def is_symmetric(self) -> bool:
        lookup = dict(self.atoms)
        return all(lookup.get(-value) == mass for value, mass in self.atoms)

    def mass_of(self, value: int) -> Mass:
        return dict(self.atoms).get(value, Fraction(0) if self.is_rational else 0.0)

    def mean(self) -> Mass:
        return sum((value * mass for value, mass in self.atoms), Fraction(0))

    def second_moment(self) -> Mass:
        return sum((value * value * mass for value, mass in self.atoms), Fraction(0))

    def as_float(self) -> "LatticePmf":
        return LatticePmf(atoms=tuple((value, float(mass)) for value, mass in self.atoms))

    def to_triples(self) -> List[List[int]]:
        """Canonical echo: exact ``[value, numerator, denominator]`` triples."""
        triples = []
        for value, mass in self.atoms:
            ratio = mass if isinstance(mass, Fraction) else Fraction(*mass.as_integer_ratio())
            triples.append([value, ratio.numerator, ratio.denominator])
        return triples

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        values = np.asarray(self.support, dtype=np.int64)
        if len(values) == 1:
            return np.full(size, values[0], dtype=np.int64)
        return rng.choice(values, size=size, p=self.probabilities)


class PeriodicityInfo(BaseModel):
    model_config = ConfigDict(frozen=True)

    d: int = Field(description="Lattice period of the scenery support.")
    alpha: int = Field(description="Support point fixing the residue class.")
    alpha0: int = Field(description="Inverse of alpha modulo d (0 when d = 1).")


class ModelConfig(BaseModel):
    """A validated (step, scenery) pair with its derived quantities."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    step: LatticePmf
    scenery: LatticePmf
    sigma_xi_sq: float = Field(description="Scenery variance.")
    periodicity: PeriodicityInfo

    @property
    def sigma_xi(self) -> float:
        return float(np.sqrt(self.sigma_xi_sq))

    @property
    def is_rational(self) -> bool:
        return self.step.is_rational and self.scenery.is_rational

    @property
    def max_abs_scenery(self) -> int:
        return max(abs(value) for value in self.scenery.support)

    def admissible(self, k: int, a: int) -> bool:
        """Whether ``Z_k = a`` is compatible with ``Z_k in k alpha + d Z``."""
        return (a - k * self.periodicity.alpha) % self.periodicity.d == 0

    def echo(self) -> dict:
        return {
            "step": self.step.to_triples(),
            "scenery": self.scenery.to_triples(),
            "sigma_xi_sq": self.sigma_xi_sq,
            "periodicity": self.periodicity.model_dump(),
        }


def check_pmf(pmf: LatticePmf) -> None:
    if not pmf.atoms:
        raise InvalidPmf("A pmf needs at least one atom")
    values = pmf.support
    if len(set(values)) != len(values):
        raise InvalidPmf(f"Repeated values in support {values}")
    if any(mass <= 0 for mass in pmf.masses):
        raise InvalidPmf("All masses must be strictly positive")
    if any(mass > 1 for mass in pmf.masses):
        raise InvalidPmf("Masses cannot exceed 1")
    total = sum(pmf.masses, Fraction(0))
    if pmf.is_rational:
        if total != 1:
            raise InvalidPmf(f"Masses sum to {total}, expected exactly 1")
    elif abs(float(total) - 1.0) > FLOAT_TOLERANCE:
        raise InvalidPmf(f"Masses sum to {float(total)!r}, expected 1 within {FLOAT_TOLERANCE}")


def _is_zero(value: Mass) -> bool:
    if isinstance(value, Fraction):
        return value == 0
    return abs(value) <= FLOAT_TOLERANCE


def _support_gcd(values: Iterable[int]) -> int:
    return reduce(gcd, (abs(v) for v in values), 0)


def derive_periodicity(scenery: LatticePmf) -> PeriodicityInfo:
    """Lattice period ``d``, residue ``alpha`` and its inverse ``alpha0``.

    ``d`` is the gcd of the pairwise support differences. ``alpha`` is the
    support point of smallest absolute value, the positive one on ties.
    """
    support = scenery.support
    d = _support_gcd(x - y for x in support for y in support)
    if d == 0:
        # single-atom support: every difference is zero
        d = 1
    alpha = min(support, key=lambda value: (abs(value), value < 0))
    alpha0 = 0 if d == 1 else pow(alpha % d, -1, d)
    return PeriodicityInfo(d=d, alpha=alpha, alpha0=alpha0)


def validate_model(step: LatticePmf, scenery: LatticePmf) -> ModelConfig:
    for name, pmf in (("step", step), ("scenery", scenery)):
        check_pmf(pmf)
        if not _is_zero(pmf.mean()):
            raise NotCentered(f"The {name} distribution has mean {pmf.mean()}, expected 0")
        if _support_gcd(pmf.support) != 1:
            raise SupportDoesNotGenerateZ(
                f"The {name} support {pmf.support} generates {_support_gcd(pmf.support)}Z, not Z"
            )
    sigma_xi_sq = float(scenery.second_moment())
    if sigma_xi_sq <= 0:
        raise ZeroVariance("The scenery variance must be positive")
    periodicity = derive_periodicity(scenery)
    logger.debug("Validated model: sigma_xi^2=%s periodicity=%s", sigma_xi_sq, periodicity)
    return ModelConfig(
        step=step, scenery=scenery, sigma_xi_sq=sigma_xi_sq, periodicity=periodicity
    )


def model_from_triples(step: Iterable[Sequence[int]], scenery: Iterable[Sequence[int]]) -> ModelConfig:
    return validate_model(LatticePmf.from_triples(step), LatticePmf.from_triples(scenery))


def rademacher_model() -> ModelConfig:
    """Simple walk with Rademacher scenery."""
    return model_from_triples([(-1, 1, 2), (1, 1, 2)], [(-1, 1, 2), (1, 1, 2)])


def lazy_scenery_model() -> ModelConfig:
    return model_from_triples([(-1, 1, 2), (1, 1, 2)], [(-1, 1, 3), (0, 1, 3), (1, 1, 3)])


def skewed_scenery_model() -> ModelConfig:
    return model_from_triples([(-1, 1, 2), (1, 1, 2)], [(1, 3, 4), (-3, 1, 4)])

from rwrs.lattice.model import (
    LatticePmf,
    ModelConfig,
    PeriodicityInfo,
    check_pmf,
    derive_periodicity,
    lazy_scenery_model,
    model_from_triples,
    rademacher_model,
    skewed_scenery_model,
    validate_model,
)

__all__ = [
    "LatticePmf",
    "ModelConfig",
    "PeriodicityInfo",
    "check_pmf",
    "derive_periodicity",
    "lazy_scenery_model",
    "model_from_triples",
    "rademacher_model",
    "skewed_scenery_model",
    "validate_model",
]

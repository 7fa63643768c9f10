from rwrs.readers.config import (
    EffectiveConfig,
    ExperimentOptions,
    ModelSection,
    RunSection,
    load_config,
    parse_assignment,
    parse_observable,
    parse_triples,
)

__all__ = [
    "EffectiveConfig",
    "ExperimentOptions",
    "ModelSection",
    "RunSection",
    "load_config",
    "parse_assignment",
    "parse_observable",
    "parse_triples",
]

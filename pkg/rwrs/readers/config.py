import configparser
import hashlib
import json
import logging
import os
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from rwrs.errors import ConfigParseError
from rwrs.lattice.model import ModelConfig, model_from_triples

logger = logging.getLogger(__name__)

ENVIRONMENT_KEYS = {
    "RWRS_SEED": ("run", "seed"),
    "RWRS_WORKERS": ("run", "workers"),
    "RWRS_OUT": ("run", "out"),
    "RWRS_ORACLE_CAP": ("experiment", "cap"),
}

Triple = Tuple[int, int, int]


def _split_list(value) -> list:
    if isinstance(value, str):
        return [item for item in value.replace(",", " ").split() if item]
    return value


def parse_triples(text: str) -> List[Triple]:
    """Parse ``"value num den; value num den"`` into integer triples.

    Parameters:
    - text: Semicolon-separated atoms, each ``value numerator denominator``.

    Returns:
    - A list of ``(value, numerator, denominator)`` tuples.
    """
    triples = []
    for atom in text.split(";"):
        parts = atom.split()
        if not parts:
            continue
        if len(parts) != 3:
            raise ValueError(f"Expected 'value numerator denominator', got {atom.strip()!r}")
        value, numerator, denominator = (int(p) for p in parts)
        triples.append((value, numerator, denominator))
    if not triples:
        raise ValueError("Empty pmf")
    return triples


def parse_observable(text: str) -> Dict[int, float]:
    """Parse ``"a weight; a weight"``; weights may be written as fractions."""
    weights: Dict[int, float] = {}
    for atom in text.split(";"):
        parts = atom.split()
        if not parts:
            continue
        if len(parts) != 2:
            raise ValueError(f"Expected 'level weight', got {atom.strip()!r}")
        weights[int(parts[0])] = weights.get(int(parts[0]), 0.0) + float(Fraction(parts[1]))
    return weights


class RunSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    experiment: str = "model-check"
    seed: int = Field(default=0, ge=0, lt=1 << 64)
    workers: int = Field(default=1, ge=1)
    out: str = "output"
    progress: bool = False


class ModelSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    step: List[Triple] = Field(default_factory=lambda: [(-1, 1, 2), (1, 1, 2)])
    scenery: List[Triple] = Field(default_factory=lambda: [(-1, 1, 2), (1, 1, 2)])

    @field_validator("step", "scenery", mode="before")
    @classmethod
    def _parse(cls, value):
        return parse_triples(value) if isinstance(value, str) else value

    def build(self) -> ModelConfig:
        return model_from_triples(self.step, self.scenery)


class ExperimentOptions(BaseModel):
    """Every experiment-specific key, with the defaults of a desk-scale run."""

    model_config = ConfigDict(extra="forbid")

    n_list: List[int] = Field(default_factory=lambda: [1024, 4096, 16384])
    reps: int = Field(default=1000, ge=0)
    statistic: str = "local_time_zero"
    level: int = 0
    keep_samples: bool = False
    observable: Dict[int, float] = Field(default_factory=lambda: {0: 1.0, 1: 1.0})
    max_moment: int = Field(default=2, ge=1)
    levels: List[int] = Field(default_factory=lambda: [0])
    joint_times: List[float] = Field(default_factory=list)
    bound_orders: List[int] = Field(default_factory=lambda: [1, 2])
    anchor_n: Optional[int] = 12
    times: List[int] = Field(default_factory=lambda: [1, 2, 3, 4])
    cap: int = 20
    exact_horizon: int = 4
    mc_horizon: int = 0
    mc_budget: int = 10_000
    enforce_centered: bool = True
    n_disc: int = 4096
    budget: int = 1000
    ks: List[int] = Field(default_factory=lambda: [4, 8, 16, 32, 64])
    scaling_times: List[float] = Field(default_factory=lambda: [0.25, 0.5])
    m_list: List[int] = Field(default_factory=lambda: [1, 2, 3])
    simplex_samples: int = 100_000
    concentration: float = 0.35
    eta0: float = 0.01
    envelope_a: float = 1.0
    carleman_terms: int = 2000
    target_budget: int = 2000
    target_n_disc: int = 4096
    g: str = "constant"
    window: int = 0
    paths: int = 100
    checkpoints: List[int] = Field(default_factory=list)

    @field_validator(
        "n_list", "levels", "times", "ks", "scaling_times", "joint_times", "bound_orders", "m_list", "checkpoints",
        mode="before",
    )
    @classmethod
    def _parse_list(cls, value):
        return _split_list(value)

    @field_validator("observable", mode="before")
    @classmethod
    def _parse_observable(cls, value):
        return parse_observable(value) if isinstance(value, str) else value

    @field_validator("joint_times")
    @classmethod
    def _joint_times_end_at_one(cls, value):
        if value and (value[-1] != 1.0 or any(not 0 < a < b for a, b in zip([0.0] + value, value))):
            raise ValueError(f"joint_times must ascend in (0, 1] and end at 1, got {value}")
        return value


class EffectiveConfig(BaseModel):
    run: RunSection = Field(default_factory=RunSection)
    model: ModelSection = Field(default_factory=ModelSection)
    experiment: ExperimentOptions = Field(default_factory=ExperimentOptions)
    criteria: Dict[int, float] = Field(
        default_factory=dict, description="Acceptance criterion id -> threshold."
    )

    def build_model(self) -> ModelConfig:
        return self.model.build()

    def canonical(self) -> Dict[str, Any]:
        return json.loads(self.model_dump_json())

    def config_hash(self) -> str:
        payload = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def read_ini(path: Union[str, Path]) -> Dict[str, Dict[str, str]]:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as e:
        raise ConfigParseError(f"Cannot read config {path}: {e}") from e
    except configparser.Error as e:
        raise ConfigParseError(f"Malformed config {path}: {e}") from e
    unknown = set(parser.sections()) - {"run", "model", "experiment", "criteria"}
    if unknown:
        raise ConfigParseError(f"Unknown sections in {path}: {sorted(unknown)}")
    return {section: dict(parser.items(section)) for section in parser.sections()}


def environment_layer(environ: Optional[Mapping[str, str]] = None) -> Dict[str, Dict[str, str]]:
    environ = os.environ if environ is None else environ
    layer: Dict[str, Dict[str, str]] = {}
    for key, (section, field) in ENVIRONMENT_KEYS.items():
        if environ.get(key):
            layer.setdefault(section, {})[field] = environ[key]
    return layer


def parse_assignment(text: str) -> Tuple[str, str]:
    """``key=value`` from ``--set``; the key may be ``section.key`` (default section ``experiment``)."""
    if "=" not in text:
        raise ConfigParseError(f"Expected key=value, got {text!r}")
    key, value = text.split("=", 1)
    return key.strip(), value.strip()


def _merge(*layers: Mapping[str, Mapping[str, Any]]) -> Dict[str, Dict[str, Any]]:
    merged: Dict[str, Dict[str, Any]] = {}
    for layer in layers:
        for section, values in layer.items():
            merged.setdefault(section, {}).update(values)
    return merged


def load_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Mapping[str, Any]]] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> EffectiveConfig:
    """Merge defaults < environment < config file < overrides and validate.

    Parameters:
    - path: INI file with ``[run]``, ``[model]``, ``[experiment]`` and ``[criteria]`` sections.
    - overrides: Section -> key -> value, typically from command-line flags.
    - environ: Environment mapping; defaults to ``os.environ``.

    Returns:
    - The validated effective configuration.
    """
    file_layer = read_ini(path) if path is not None else {}
    merged = _merge(environment_layer(environ), file_layer, overrides or {})
    try:
        return EffectiveConfig(
            run=RunSection(**merged.get("run", {})),
            model=ModelSection(**merged.get("model", {})),
            experiment=ExperimentOptions(**merged.get("experiment", {})),
            criteria={int(k): float(v) for k, v in merged.get("criteria", {}).items()},
        )
    except (ValidationError, ValueError) as e:
        raise ConfigParseError(f"Invalid configuration{f' in {path}' if path else ''}: {e}") from e

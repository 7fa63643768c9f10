import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from rwrs import __version__
from rwrs.errors import IoFailure

logger = logging.getLogger(__name__)

CRITERIA = {
    1: "oracle_mc_agreement",
    2: "congruence",
    3: "simplex_closed_form",
    4: "gram_recursion",
    5: "first_moment_cross_estimator",
    6: "local_limit_plateau",
    7: "vk_exponent",
    8: "green_kubo",
    9: "clt_moments",
    10: "lln_moments",
    11: "ratio_ergodic",
    12: "functional_limit",
    13: "moment_sandwich",
    14: "reproducibility",
}


class Criterion(BaseModel):
    id: int
    name: str
    passed: bool
    value: Optional[float] = None
    threshold: Optional[float] = None
    detail: str = ""

    @classmethod
    def check(cls, criterion_id: int, passed: bool, value=None, threshold=None, detail: str = "") -> "Criterion":
        return cls(
            id=criterion_id,
            name=CRITERIA[criterion_id],
            passed=bool(passed),
            value=None if value is None else float(value),
            threshold=threshold,
            detail=detail,
        )

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        value = "" if self.value is None else f" value={self.value:.6g}"
        threshold = "" if self.threshold is None else f" threshold={self.threshold:.6g}"
        return f"{status} [{self.id}] {self.name}{value}{threshold} {self.detail}".rstrip()


class ExperimentReport(BaseModel):
    """Everything needed to reproduce and audit one run; timing lives in a sidecar file."""

    experiment: str
    config_hash: str
    seed: int
    version: str = __version__
    config: Dict[str, Any]
    payload: Dict[str, Any] = Field(default_factory=dict)
    provenance: Dict[str, str] = Field(default_factory=dict)
    criteria: List[Criterion] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return value.item()
    return value


def report_json(report: ExperimentReport) -> str:
    """Canonical JSON: sorted keys, fixed indentation."""
    return json.dumps(_jsonable(report.model_dump(mode="python")), sort_keys=True, indent=2) + "\n"


def write_artifacts(
    report: ExperimentReport,
    tables: Mapping[str, pd.DataFrame],
    out_dir: Path,
    timing: Optional[Dict[str, float]] = None,
    raw: Optional[Mapping[str, np.ndarray]] = None,
) -> List[Path]:
    """Write ``<experiment>.json``, one CSV per table, raw ``<key>.f64`` samples and the timing sidecar.

    Every payload is rendered before the first file is opened.
    """
    out_dir = Path(out_dir)
    rendered: Dict[Path, Union[str, bytes]] = {out_dir / f"{report.experiment}.json": report_json(report)}
    for name, frame in tables.items():
        suffix = "" if name == report.experiment else f"_{name}"
        rendered[out_dir / f"{report.experiment}{suffix}.csv"] = frame.to_csv(index=False)
    for key, samples in (raw or {}).items():
        rendered[out_dir / f"{key}.f64"] = np.asarray(samples, dtype="<f8").tobytes()
    if timing is not None:
        rendered[out_dir / f"{report.experiment}.timing.json"] = json.dumps(timing, sort_keys=True, indent=2) + "\n"
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for path, payload in rendered.items():
            if isinstance(payload, bytes):
                path.write_bytes(payload)
            else:
                path.write_text(payload, encoding="utf-8")
    except OSError as e:
        raise IoFailure(f"Could not write artifacts to {out_dir}: {e}") from e
    logger.info("Wrote %d artifacts to %s", len(rendered), out_dir)
    return list(rendered)

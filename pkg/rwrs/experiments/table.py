from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, model_validator

COLUMNS = ["n", "statistic", "value", "stderr", "target", "provenance", "reps"]


class ConvergenceRow(BaseModel):
    n: int
    statistic: str
    value: float
    stderr: float
    target: Optional[float] = None
    provenance: str = ""
    reps: int
    extra: Dict[str, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _target_needs_provenance(self):
        if self.target is not None and not self.provenance:
            raise ValueError(f"Row {self.statistic!r} at n={self.n} has a target without provenance")
        return self


class ConvergenceTable(BaseModel):
    experiment: str
    rows: List[ConvergenceRow] = Field(default_factory=list)
    summary: Dict[str, float] = Field(default_factory=dict)

    def add(self, **fields) -> ConvergenceRow:
        row = ConvergenceRow(**fields)
        self.rows.append(row)
        return row

    def select(self, statistic: str) -> List[ConvergenceRow]:
        return sorted((r for r in self.rows if r.statistic == statistic), key=lambda r: r.n)

    def row(self, statistic: str, n: int) -> ConvergenceRow:
        for r in self.rows:
            if r.statistic == statistic and r.n == n:
                return r
        raise KeyError(f"No row {statistic!r} at n={n}")

    def to_frame(self) -> pd.DataFrame:
        """Long, plot-ready layout; ``extra`` keys become trailing columns."""
        records = []
        for r in self.rows:
            record = {
                "n": r.n,
                "statistic": r.statistic,
                "value": r.value,
                "stderr": r.stderr,
                "target": r.target,
                "provenance": r.provenance,
                "reps": r.reps,
            }
            record.update(r.extra)
            records.append(record)
        frame = pd.DataFrame.from_records(records)
        if frame.empty:
            return pd.DataFrame(columns=COLUMNS)
        extra = sorted(c for c in frame.columns if c not in COLUMNS)
        return frame[COLUMNS + extra]


def is_non_increasing(values: Sequence[float], tolerance: float = 0.0) -> bool:
    return all(b <= a + tolerance for a, b in zip(values, values[1:]))


def is_strictly_decreasing(values: Sequence[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def sample_moment(samples: np.ndarray, order: int):
    """Mean of ``samples ** order`` and its standard error."""
    powered = np.asarray(samples, dtype=np.float64) ** order
    count = len(powered)
    mean = float(np.sum(powered) / count)
    stderr = float(np.std(powered, ddof=1) / np.sqrt(count)) if count > 1 else 0.0
    return mean, stderr


def median_stderr(samples: np.ndarray) -> float:
    """Normal-approximation standard error of the sample median."""
    samples = np.asarray(samples, dtype=np.float64)
    if len(samples) < 2:
        return 0.0
    return float(1.2533 * np.std(samples, ddof=1) / np.sqrt(len(samples)))

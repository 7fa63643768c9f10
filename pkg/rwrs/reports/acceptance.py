import json
import logging
from pathlib import Path
from typing import List, Union

import pandas as pd
from pydantic import BaseModel, ConfigDict

from rwrs.errors import EmptyDirectory, IoFailure
from rwrs.reports.artifacts import CRITERIA

logger = logging.getLogger(__name__)

ACCEPTANCE_FILE = "acceptance.csv"
COLUMNS = ["criterion", "name", "experiment", "passed", "value", "threshold", "detail"]


class AcceptanceSummary(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    passed: bool
    failing: List[int]
    table: pd.DataFrame

    @property
    def evaluated(self) -> int:
        return len(self.table)

    def line(self) -> str:
        if self.passed:
            return "PASS"
        if not self.evaluated:
            return "FAIL no criteria evaluated"
        return "FAIL " + ", ".join(str(i) for i in self.failing)


def artifact_paths(directory: Path) -> List[Path]:
    return sorted(p for p in directory.glob("*.json") if not p.name.endswith(".timing.json"))


def load_criteria(directory: Path) -> pd.DataFrame:
    records = []
    for path in artifact_paths(directory):
        try:
            artifact = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise IoFailure(f"Cannot read artifact {path}: {e}") from e
        for criterion in artifact.get("criteria", []):
            records.append(
                {
                    "criterion": criterion["id"],
                    "name": criterion.get("name", CRITERIA.get(criterion["id"], "")),
                    "experiment": artifact.get("experiment", path.stem),
                    "passed": bool(criterion["passed"]),
                    "value": criterion.get("value"),
                    "threshold": criterion.get("threshold"),
                    "detail": criterion.get("detail", ""),
                }
            )
    return pd.DataFrame.from_records(records, columns=COLUMNS)


def report(directory: Union[str, Path]) -> AcceptanceSummary:
    """Merge every artifact's criteria into ``acceptance.csv``.

    A criterion evaluated by several experiments passes only if all of them pass.
    Artifacts that evaluate no criterion at all give an overall FAIL.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise IoFailure(f"{directory} is not a directory")
    if not artifact_paths(directory):
        raise EmptyDirectory(f"No artifacts in {directory}")
    table = load_criteria(directory).sort_values(["criterion", "experiment"], kind="stable")
    failing = sorted({int(c) for c in table.loc[~table["passed"].astype(bool), "criterion"]})
    try:
        table.to_csv(directory / ACCEPTANCE_FILE, index=False)
    except OSError as e:
        raise IoFailure(f"Cannot write {directory / ACCEPTANCE_FILE}: {e}") from e
    if table.empty:
        logger.warning("No criteria evaluated in %s", directory)
    return AcceptanceSummary(
        passed=not failing and not table.empty, failing=failing, table=table.reset_index(drop=True)
    )

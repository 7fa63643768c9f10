from rwrs.reports.acceptance import AcceptanceSummary, report
from rwrs.reports.artifacts import CRITERIA, Criterion, ExperimentReport, report_json, write_artifacts

__all__ = [
    "AcceptanceSummary",
    "report",
    "CRITERIA",
    "Criterion",
    "ExperimentReport",
    "report_json",
    "write_artifacts",
]

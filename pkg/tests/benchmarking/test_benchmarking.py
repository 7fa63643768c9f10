import pandas as pd

from benchmarking.__main__ import run_benchmarking_pipeline
from benchmarking.utils import STATS_FILE


def test_stats_rows_are_appended(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    rows = run_benchmarking_pipeline("rademacher", 64, 40, "local_time_zero", 1, [1, 2])
    assert all(row["identical"] for row in rows)
    run_benchmarking_pipeline("lazy", 32, 10, "endpoint", 2, [1])
    stats = pd.read_csv(tmp_path / STATS_FILE)
    assert list(stats["workers"]) == [1, 2, 1]
    assert list(stats["model"]) == ["rademacher", "rademacher", "lazy"]

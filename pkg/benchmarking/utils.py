from pathlib import Path

import pandas as pd

STATS_FILE = "benchmarking/output/stats.csv"


def write_benchmarking_data(data, stats_file=STATS_FILE):
    path = Path(stats_file)
    path.parent.mkdir(parents=True, exist_ok=True)
    df = pd.DataFrame([data])
    with open(path, "a") as f:
        df.to_csv(f, header=f.tell() == 0, index=False)

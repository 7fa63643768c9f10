import argparse
import time

import numpy as np

from benchmarking.utils import write_benchmarking_data
from rwrs.lattice.model import lazy_scenery_model, rademacher_model, skewed_scenery_model
from rwrs.walks.batch import sample_statistic
from rwrs.walks.parallel import summarize

MODELS = {
    "rademacher": rademacher_model,
    "lazy": lazy_scenery_model,
    "skewed": skewed_scenery_model,
}


def run_benchmarking_pipeline(model_name, n, reps, statistic, seed, workers_list):
    model = MODELS[model_name]()
    reference = None
    rows = []
    for workers in workers_list:
        start_time = time.time()
        samples = sample_statistic(model, n, reps, statistic, seed, experiment="benchmark", workers=workers)
        execution_time = time.time() - start_time

        if reference is None:
            reference = samples
        estimate, _, stderr = summarize(samples)
        stats = {
            "model": model_name,
            "statistic": statistic,
            "n": n,
            "reps": reps,
            "seed": seed,
            "workers": workers,
            "execution_time": execution_time,
            "walks_per_second": reps / execution_time if execution_time > 0 else float("inf"),
            "estimate": estimate,
            "stderr": stderr,
            "identical": bool(np.array_equal(samples, reference)),
        }
        print(f">> workers={workers} time={execution_time:.2f}s identical={stats['identical']}")
        write_benchmarking_data(stats)
        rows.append(stats)
    return rows


def main():
    parser = argparse.ArgumentParser(description="Time the batch engine across worker counts.")
    parser.add_argument("--model", type=str, choices=sorted(MODELS), default="rademacher")
    parser.add_argument("--n", type=int, default=1 << 14, help="Walk length")
    parser.add_argument("--reps", type=int, default=2000, help="Replicates")
    parser.add_argument("--statistic", type=str, default="local_time_zero")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, nargs="+", default=[1, 2, 4, 8])

    args = parser.parse_args()
    run_benchmarking_pipeline(args.model, args.n, args.reps, args.statistic, args.seed, args.workers)


if __name__ == "__main__":
    main()

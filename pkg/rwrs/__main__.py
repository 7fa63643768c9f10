import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from rwrs.app import EXPERIMENTS, run
from rwrs.errors import RwrsError, exit_code_for
from rwrs.readers.config import parse_assignment
from rwrs.reports.acceptance import report

logger = logging.getLogger(__name__)


def _add_run_options(parser: argparse.ArgumentParser, config_required: bool) -> None:
    parser.add_argument(
        "config", type=str, nargs=None if config_required else "?", default=None, help="INI configuration file"
    )
    parser.add_argument("--seed", type=int, default=None, help="Master seed")
    parser.add_argument("--workers", type=int, default=None, help="Worker processes")
    parser.add_argument("--out", type=str, default=None, help="Output directory for artifacts")
    parser.add_argument("--n", type=int, default=None, help="Single walk length (replaces n_list)")
    parser.add_argument("--reps", type=int, default=None, help="Replicates per walk length")
    parser.add_argument("--progress", action="store_true", help="Show progress bars")
    parser.add_argument(
        "--set",
        dest="assignments",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override any key; use section.key for [run], [model] or [criteria] (default section: experiment)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rwrs", description="Simulate and verify random walks in random scenery."
    )
    parser.add_argument(
        "--log-level", type=str, default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"]
    )
    commands = parser.add_subparsers(dest="command", required=True)

    _add_run_options(commands.add_parser("run", help="Run the experiment named in the config"), True)
    for name in EXPERIMENTS:
        sub = commands.add_parser(name, help=f"Run the {name} experiment")
        _add_run_options(sub, False)
        sub.set_defaults(experiment=name)

    acceptance = commands.add_parser("report", help="Merge acceptance criteria from an artifact directory")
    acceptance.add_argument("directory", type=str)
    return parser


def collect_overrides(args: argparse.Namespace) -> Dict[str, Dict[str, Any]]:
    overrides: Dict[str, Dict[str, Any]] = {}
    for key, value in (parse_assignment(item) for item in args.assignments):
        section, _, field = key.rpartition(".")
        overrides.setdefault(section or "experiment", {})[field] = value
    run_section = overrides.setdefault("run", {})
    for field in ("seed", "workers", "out"):
        if getattr(args, field) is not None:
            run_section[field] = getattr(args, field)
    if args.progress:
        run_section["progress"] = True
    if getattr(args, "experiment", None):
        run_section["experiment"] = args.experiment
    experiment = overrides.setdefault("experiment", {})
    if args.n is not None:
        experiment["n_list"] = [args.n]
    if args.reps is not None:
        experiment["reps"] = args.reps
    return overrides


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "report":
            summary = report(args.directory)
            for row in summary.table.itertuples():
                print(f"{'PASS' if row.passed else 'FAIL'} [{row.criterion}] {row.name} ({row.experiment})")
            print(summary.line())
            return 0 if summary.passed else 1
        run(args.config, collect_overrides(args))
        return 0
    except RwrsError as e:
        logger.error("%s", e)
        print(f"Error: {e}", file=sys.stderr)
        return exit_code_for(e)


if __name__ == "__main__":
    sys.exit(main())

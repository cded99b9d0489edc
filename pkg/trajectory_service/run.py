"""
Command-line entry point.

    python run.py run <config-file> [--out DIR] [--seed N] [--threads N] [--strict] [--dump-measurements] [--solve-reports]

Exit codes: 0 on success, 1 on a configuration error, 2 when --strict is set
and a grid point did not converge.
"""
from __future__ import annotations

import sys
from argparse import ArgumentParser, Namespace
from pathlib import Path
from typing import Optional, Sequence

from config.experiment_loader import load_experiment_config
from errors import ConfigError
from logger_config import logger
from modules.bench.runner import ExperimentRunner

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NOT_CONVERGED = 2


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(description="GP trajectory estimation benchmark")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run an experiment file")
    run.add_argument("config", type=Path, help="Experiment file (key = value lines)")
    run.add_argument("--out", type=Path, default=None, help="Output directory for the CSV reports")
    run.add_argument("--seed", type=int, default=None, help="Override the experiment seed")
    run.add_argument("--threads", type=int, default=None, help="Grid points solved in parallel")
    run.add_argument("--strict", action="store_true", help="Exit with code 2 if any grid point did not converge")
    run.add_argument("--dump-measurements", action="store_true", help="Also write the simulated measurements")
    run.add_argument("--solve-reports", action="store_true", help="Also write the per-iteration solver reports as JSON lines")
    return parser


def run_command(args: Namespace) -> int:
    try:
        cfg = load_experiment_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError(f"--seed must be non-negative, got {args.seed}")
            cfg = cfg.model_copy(update={"seed": args.seed})
        if args.threads is not None and args.threads < 1:
            raise ConfigError(f"--threads must be at least 1, got {args.threads}")
        runner = ExperimentRunner(cfg, threads=args.threads)
    except ConfigError as exc:
        logger.error(f"Configuration error: {exc}")
        return EXIT_CONFIG

    measurements = runner.simulate()
    if args.dump_measurements:
        runner.dump_measurements(measurements, args.out)
    results = runner.run(measurements)
    runner.write_reports(results, args.out)
    if args.solve_reports:
        runner.write_solve_reports(results, args.out)

    if args.strict and not all(result.converged for result in results):
        logger.error("Strict mode: at least one grid point did not converge")
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return run_command(args)
    except Exception as exc:
        logger.exception(f"Experiment failed: {exc}")
        raise
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

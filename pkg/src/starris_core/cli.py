#!/usr/bin/env python3
"""STAR-RIS Core CLI - coupled phase-shift experiments"""

import argparse
import asyncio
import logging
import sys
from typing import List, Optional

from .config import ALL_SCHEMES, ExperimentConfig, load_config
from .errors import FeasibilityError, InternalError, InvalidInputError, NumericalError
from .experiment_pipeline import ExperimentPipeline

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_INVALID = 2
EXIT_SOLVER = 3

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")


def _scheme_list(text: str) -> List[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="starris",
        description="STAR-RIS coupled phase-shift optimization experiments",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML configuration file")
    common.add_argument("--seed", type=int, help="Base seed (overrides system.seed)")
    common.add_argument("--out", help="Output directory (overrides experiment.output)")
    common.add_argument(
        "--schemes",
        type=_scheme_list,
        help=f"Comma-separated subset of {','.join(ALL_SCHEMES)}",
    )
    common.add_argument("--realizations", type=int, help="Monte Carlo realizations per point")
    common.add_argument("--workers", type=int, help="Worker processes for independent trials")
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    common.add_argument("--log-file", help="Also write the log to this file")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    run_parser = subparsers.add_parser("run", parents=[common], help="Single realization, every scheme")
    run_parser.add_argument("-N", type=int, help="Number of STAR-RIS elements")
    run_parser.add_argument("-K", type=int, help="Number of users (even)")

    converge_parser = subparsers.add_parser(
        "converge", parents=[common], help="PDD convergence traces (CSV)"
    )
    converge_parser.add_argument("-N", type=int, help="Number of STAR-RIS elements")
    converge_parser.add_argument(
        "--k-values", type=_int_list, help="Comma-separated user counts, e.g. 2,4,6"
    )

    sweep_parser = subparsers.add_parser("sweep", parents=[common], help="Throughput versus N (CSV)")
    sweep_parser.add_argument("--n-values", type=_int_list, help="Comma-separated element counts")
    sweep_parser.add_argument("--k-values", type=_int_list, help="Comma-separated user counts")

    return parser


def configure_logging(verbose: bool, log_file: Optional[str]) -> None:
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    config = load_config(args.config)
    overrides = {
        "seed": args.seed,
        "output": args.out,
        "schemes": args.schemes,
        "realizations": args.realizations,
        "workers": args.workers,
        "N": getattr(args, "N", None),
        "K": getattr(args, "K", None),
        "n_values": getattr(args, "n_values", None),
    }
    k_values = getattr(args, "k_values", None)
    if k_values is not None:
        overrides["convergence_k_values" if args.command == "converge" else "k_values"] = k_values
    return config.with_overrides(**overrides)


def exit_code_for(error: Optional[BaseException]) -> int:
    if error is None:
        return EXIT_OK
    if isinstance(error, InvalidInputError):
        return EXIT_INVALID
    if isinstance(error, (FeasibilityError, InternalError, NumericalError)):
        return EXIT_SOLVER
    return EXIT_UNEXPECTED


def print_run_table(rows: List[dict]) -> None:
    print(f"{'scheme':<18}{'rate [bit/s/Hz]':>16}{'converged':>11}{'iters':>7}{'delta':>11}")
    for row in rows:
        print(
            f"{row['scheme']:<18}{row['rate']:>16.4f}{str(row['converged']):>11}"
            f"{row['iterations']:>7}{row['delta']:>11.2e}"
        )


async def run_command(args: argparse.Namespace) -> int:
    try:
        config = resolve_config(args)
    except InvalidInputError as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_INVALID

    pipeline = ExperimentPipeline(config)
    if args.command == "run":
        success = await pipeline.run_single()
    elif args.command == "converge":
        success = await pipeline.run_convergence()
    else:
        success = await pipeline.run_sweep()

    pipeline.generate_report()
    if not success:
        return exit_code_for(pipeline.failure)

    output = pipeline.results["stages"]["output"]
    if args.command == "run":
        print_run_table(output["schemes"])
    else:
        print(f"Wrote {output['csv']}")

    # sweeps report non-convergence through converged_fraction instead
    if args.command in ("run", "converge") and pipeline.non_converged:
        logger.error(f"Not converged: {pipeline.non_converged}")
        return EXIT_SOLVER
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return EXIT_INVALID

    configure_logging(args.verbose, args.log_file)
    try:
        return asyncio.run(run_command(args))
    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())

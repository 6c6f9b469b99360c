"""
Command line application configuration
"""
import argparse
import logging
import sys

from src import __version__
from src.commands import compare, generate, sample, sweep, verify
from src.config import get_log_level
from src.optimization.exceptions import (
    CapacityExceededError,
    DegenerateProjectionError,
    InvalidInputError,
    ThermodynamicsError,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qanneal",
        description="Simulation toolkit for probabilistic quantum annealing by post-selection.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level",
        default=None,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="logging level (default from QANNEAL_LOG_LEVEL)",
    )

    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in (generate, verify, sample, sweep, compare):
        command.add_parser(subparsers)

    return parser


def main(argv: list[str] | None = None) -> int:
    """Parses `argv`, runs the subcommand and returns the process exit code.

    0 on success, 1 when a verification or numerical check fails, 2 for usage errors,
    invalid inputs and refused capacities.
    """
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        log_level = args.log_level or get_log_level()
        logging.basicConfig(
            level=log_level,
            stream=sys.stderr,
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        )
        return args.func(args)
    except (InvalidInputError, CapacityExceededError) as exc:
        logger.error(str(exc))
        return EXIT_USAGE
    except (DegenerateProjectionError, ThermodynamicsError) as exc:
        logger.error(str(exc))
        return EXIT_FAILED
    except ValueError as exc:
        # configuration errors
        logger.error(str(exc))
        return EXIT_USAGE

"""
Helpers shared by the subcommands: common flags, instance loading and output writing.
"""
import argparse
import logging
import sys
from pathlib import Path

from src.config import get_max_enumeration_bits, get_max_qubits, get_max_repetitions
from src.data.instances import read_instance
from src.optimization.circuit import Mode
from src.optimization.cost import CostFunction, GraphPartitionInstance

logger = logging.getLogger(__name__)

MODE_CHOICES: dict[str, Mode] = {"gate": "gate_level", "closed": "closed_form"}


def positive_int(raw_value: str) -> int:
    try:
        value = int(raw_value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected an integer, got {raw_value!r}") from exc
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {value}")
    return value


def non_negative_int(raw_value: str) -> int:
    try:
        value = int(raw_value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected an integer, got {raw_value!r}") from exc
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {value}")
    return value


def add_common_arguments(parser: argparse.ArgumentParser, mode: bool = False) -> None:
    parser.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    parser.add_argument("--out", type=Path, default=None, help="output file (default stdout)")
    parser.add_argument(
        "--threads", type=positive_int, default=1, help="trial-level worker threads"
    )
    parser.add_argument(
        "--no-timestamp",
        action="store_true",
        help="leave the generation timestamp out for byte-identical reruns",
    )
    if mode:
        parser.add_argument(
            "--mode",
            choices=list(MODE_CHOICES),
            default="closed",
            help="gate: dense state-vector simulation, closed: closed-form distributions",
        )


def add_instance_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("instance", type=Path, help="instance JSON file (cost or graph)")


def load_instance(path: Path) -> tuple[CostFunction, GraphPartitionInstance | None]:
    cost, graph = read_instance(path)
    logger.info(f"loaded {path}: n={cost.n}, {len(cost.terms)} terms")
    return cost, graph


def resolved_limits() -> dict:
    """Environment-driven limits in effect, recorded in output headers."""
    return {
        "max_qubits": get_max_qubits(),
        "max_enumeration_bits": get_max_enumeration_bits(),
        "max_repetitions": get_max_repetitions(),
    }


def base_config(args: argparse.Namespace) -> dict:
    """Resolved configuration of a command, without output-only flags and without the
    thread count, which never changes results."""
    excluded = {"func", "out", "summary", "csv", "dump", "no_timestamp", "log_level", "threads"}
    config = {
        key: str(value) if isinstance(value, Path) else value
        for key, value in sorted(vars(args).items())
        if key not in excluded
    }
    config["limits"] = resolved_limits()

    return config


def write_text(text: str, path: Path | None) -> None:
    """Writes to `path`, or to stdout when `path` is None or "-"."""
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return

    Path(path).write_text(text, encoding="utf-8")
    logger.info(f"output written to {path}")

"""
`sweep`: effective thermodynamics over a list of b values.
"""
import argparse
import logging
from pathlib import Path

from src.commands.utils import (
    add_common_arguments,
    add_instance_argument,
    base_config,
    load_instance,
    write_text,
)
from src.data.data_processing import csv_text, sweep_frame
from src.data.utils import dumps_record, output_header
from src.optimization import ensemble

logger = logging.getLogger(__name__)

DEFAULT_B_LIST = "1,2,4,8,16,32"


def b_list(raw_value: str) -> list[float]:
    try:
        values = [float(item) for item in raw_value.split(",") if item.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"expected comma separated numbers, got {raw_value!r}"
        ) from exc
    if not values or any(not value > 0 for value in values):
        raise argparse.ArgumentTypeError(f"b values must be positive, got {raw_value!r}")
    return values


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser("sweep", help="thermodynamic sweep written as CSV")
    add_instance_argument(parser)
    parser.add_argument(
        "--b-list",
        type=b_list,
        default=b_list(DEFAULT_B_LIST),
        help=f"comma separated b values (default {DEFAULT_B_LIST})",
    )
    add_common_arguments(parser)
    parser.set_defaults(func=run)


def meta_path(out: Path) -> Path:
    return out.with_name(out.name + ".meta.json")


def run(args: argparse.Namespace) -> int:
    cost, _ = load_instance(args.instance)

    points = ensemble.sweep(cost, args.b_list)
    c_zero, c_inf = ensemble.effective_cost_limits(cost)
    violations = ensemble.check_monotonicity(points)
    consistency = max(ensemble.consistency_p0b(cost, point.b) for point in points)

    meta = output_header(base_config(args), args.seed, not args.no_timestamp)
    meta |= {
        "n": cost.n,
        "c_zero": c_zero,
        "c_inf": c_inf,
        "degenerate": any(point.degenerate for point in points),
        "monotonicity_violations": violations,
        "max_consistency_residual": consistency,
    }

    write_text(csv_text(sweep_frame(points)), args.out)
    if args.out is None or str(args.out) == "-":
        logger.info(f"sweep metadata: {dumps_record(meta)}")
    else:
        write_text(dumps_record(meta), meta_path(args.out))

    return 0

"""
`compare`: quantum load against simulated annealing and exhaustive search.
"""
import argparse
from pathlib import Path

from src.commands.utils import (
    MODE_CHOICES,
    add_common_arguments,
    add_instance_argument,
    base_config,
    load_instance,
    non_negative_int,
    positive_int,
    write_text,
)
from src.data.data_processing import csv_text, load_rows
from src.data.utils import dumps_record, output_header
from src.optimization.baseline import SAParams, compare_loads

DEFAULTS = SAParams()


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser(
        "compare", help="compare quantum and simulated annealing computational loads"
    )
    add_instance_argument(parser)
    parser.add_argument("--b", type=positive_int, required=True, help="number of control qubits")
    parser.add_argument(
        "--trials", type=non_negative_int, default=20, help="runs per method (0: empty record)"
    )
    parser.add_argument("--sa-steps", type=positive_int, default=DEFAULTS.n_steps)
    parser.add_argument("--t-start", type=float, default=DEFAULTS.t_start)
    parser.add_argument("--t-end", type=float, default=DEFAULTS.t_end)
    parser.add_argument(
        "--ratio", type=float, default=None, help="cooling ratio (default: reach t-end exactly)"
    )
    parser.add_argument(
        "--max-matched-steps",
        type=positive_int,
        default=DEFAULTS.max_matched_steps,
        help="upper limit of the matched-accuracy step search",
    )
    parser.add_argument(
        "--csv", type=Path, default=None, help="also write the per-method load table as CSV"
    )
    add_common_arguments(parser, mode=True)
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    cost, _ = load_instance(args.instance)
    params = SAParams(
        t_start=args.t_start,
        t_end=args.t_end,
        ratio=args.ratio,
        n_steps=args.sa_steps,
        max_matched_steps=args.max_matched_steps,
    )
    comparison = compare_loads(
        cost, args.b, params, args.trials, args.seed, args.threads, MODE_CHOICES[args.mode]
    )

    record = output_header(base_config(args), args.seed, not args.no_timestamp)
    record["comparison"] = comparison
    write_text(dumps_record(record), args.out)

    if args.csv is not None and comparison:
        write_text(csv_text(load_rows(comparison)), args.csv)

    return 0

"""
`sample`: repeat-until-success runs of the circuit.
"""
import argparse
from pathlib import Path

from src.commands.utils import (
    MODE_CHOICES,
    add_common_arguments,
    add_instance_argument,
    base_config,
    load_instance,
    positive_int,
    write_text,
)
from src.data.data_processing import sample_summary
from src.data.utils import dumps_line, dumps_record, output_header
from src.optimization import ensemble
from src.optimization.circuit import sample_many


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser("sample", help="sample complete runs of the heuristic")
    add_instance_argument(parser)
    parser.add_argument("--b", type=positive_int, required=True, help="number of control qubits")
    parser.add_argument("--trials", type=positive_int, default=1000, help="number of runs")
    parser.add_argument(
        "--summary",
        type=Path,
        default=None,
        help="summary JSON file (default stdout)",
    )
    add_common_arguments(parser, mode=True)
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    cost, _ = load_instance(args.instance)
    mode = MODE_CHOICES[args.mode]

    records = sample_many(cost, args.b, args.trials, mode, args.seed, args.threads)

    if args.out is not None:
        write_text("".join(dumps_line(record) for record in records), args.out)

    _, p0b = ensemble.partition_function(cost, args.b)
    summary = output_header(base_config(args), args.seed, not args.no_timestamp)
    summary |= {
        "n": cost.n,
        "b": args.b,
        "mode": mode,
        "p0b": p0b,
        **sample_summary(records, cost, ensemble.boltzmann_distribution(cost, args.b), p0b),
    }
    write_text(dumps_record(summary), args.summary)

    return 0

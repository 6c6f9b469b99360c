"""
`generate`: reproducible random instances.
"""
import argparse

from src.commands.utils import add_common_arguments, positive_int, write_text
from src.data.instances import cost_to_dict, dumps_instance, graph_to_dict
from src.optimization.cost import random_graph, random_local_cost


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser("generate", help="generate a random instance file")
    kinds = parser.add_subparsers(dest="kind", required=True)

    graph_parser = kinds.add_parser("graph", help="random graph-partitioning instance")
    graph_parser.add_argument("--v", type=positive_int, required=True, help="even vertex count")
    graph_parser.add_argument("--p", type=float, default=0.5, help="edge probability")
    graph_parser.add_argument("--j", type=float, default=1.0, help="edge coupling J")
    graph_parser.add_argument(
        "--lambda", dest="lam", type=float, default=0.0, help="balance penalty weight"
    )
    add_common_arguments(graph_parser)
    graph_parser.set_defaults(func=run)

    cost_parser = kinds.add_parser("cost", help="random k-local cost function")
    cost_parser.add_argument("--n", type=positive_int, required=True, help="number of bits")
    cost_parser.add_argument("--m", type=positive_int, required=True, help="maximal term arity")
    cost_parser.add_argument(
        "--density", type=float, default=0.5, help="probability that a bit subset carries a term"
    )
    add_common_arguments(cost_parser)
    cost_parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    match args.kind:
        case "graph":
            instance = random_graph(args.v, args.p, seed=args.seed, j=args.j, lam=args.lam)
            record = graph_to_dict(instance, seed=args.seed)
        case "cost":
            cost = random_local_cost(args.n, args.m, term_density=args.density, seed=args.seed)
            record = cost_to_dict(cost, seed=args.seed)

    write_text(dumps_instance(record), args.out)

    return 0

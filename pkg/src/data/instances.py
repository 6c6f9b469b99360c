"""
Instance files: JSON encoding of cost functions and graph-partitioning instances.
"""
import json
import logging
from pathlib import Path

from src import __version__
from src.optimization.cost import (
    CostFunction,
    GraphPartitionInstance,
    build_cost,
    canonicalize_terms,
    graph_partition_cost,
    subset_cost,
    with_bounds,
)
from src.optimization.exceptions import InvalidInputError

logger = logging.getLogger(__name__)

INSTANCE_KINDS = ("cost", "graph")


def cost_to_dict(cost: CostFunction, seed: int | None = None) -> dict:
    """Serializable form of a cost function, fields in a fixed order.

    Costs drawn by `random_local_cost` also record the generator arguments m and density.
    """
    record = {
        "kind": "cost",
        "n": cost.n,
        "constant": cost.constant,
        "terms": [
            {"qubits": list(term.qubits), "values": list(term.values)} for term in cost.terms
        ],
        "c_min": cost.c_min,
        "c_max": cost.c_max,
        "seed": seed,
        "generator_version": __version__,
    }
    if cost.metadata.get("generator") == "random_local_cost":
        record["m"] = cost.metadata["m"]
        record["density"] = cost.metadata["term_density"]

    return record


def graph_to_dict(instance: GraphPartitionInstance, seed: int | None = None) -> dict:
    return {
        "kind": "graph",
        "v": instance.v,
        "edges": [list(edge) for edge in instance.edges],
        "j": instance.j,
        "lambda": instance.lam,
        "p": instance.p,
        "seed": seed,
        "generator_version": __version__,
    }


def _require(record: dict, *keys: str) -> None:
    missing = [key for key in keys if key not in record]
    if missing:
        raise InvalidInputError(f"instance record is missing the fields {missing}")


def cost_from_dict(record: dict) -> CostFunction:
    """Builds a cost function from its JSON record.

    Terms go through `canonicalize_terms`: qubits may be listed in any order and terms
    on the same subset are summed. Bounds are optional: when absent they are derived
    from the terms, when present they must be strict for every assignment.
    """
    _require(record, "n", "terms")
    try:
        terms = canonicalize_terms(
            (term["qubits"], term["values"]) for term in record["terms"]
        )
    except InvalidInputError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed term in instance record: {exc}") from exc

    metadata = {"seed": record.get("seed")}
    cost = build_cost(record["n"], record.get("constant", 0.0), terms, metadata=metadata)

    if "c_min" in record and "c_max" in record:
        cost = with_bounds(cost, record["c_min"], record["c_max"])

    return cost


def graph_from_dict(record: dict) -> GraphPartitionInstance:
    _require(record, "v", "edges")
    return GraphPartitionInstance(
        v=record["v"],
        edges=tuple(tuple(edge) for edge in record["edges"]),
        j=record.get("j", 1.0),
        lam=record.get("lambda", 0.0),
        p=record.get("p", 0.5),
    )


def dumps_instance(record: dict) -> str:
    return json.dumps(record, indent=2) + "\n"


def write_instance(record: dict, path: Path) -> None:
    Path(path).write_text(dumps_instance(record), encoding="utf-8")
    logger.info(f"instance written to {path}")


def read_instance(path: Path) -> tuple[CostFunction, GraphPartitionInstance | None]:
    """Loads an instance file.

    Parameters
    ----------
    path: Path
        JSON file holding either a cost function or a graph instance. Files without a
        "kind" field are recognized by their keys ("v" for graphs, "n" for costs).

    Returns
    -------
    tuple
        The cost function, and the graph instance it was built from (None for plain costs).
        An "allowed" list of bitstrings restricts the search set with `subset_cost`.
    """
    try:
        record = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read instance file {path}: {exc}") from exc

    if not isinstance(record, dict):
        raise InvalidInputError(f"instance file {path} must hold a JSON object")

    kind = record.get("kind", "graph" if "v" in record else "cost")
    match kind:
        case "cost":
            cost, instance = cost_from_dict(record), None
        case "graph":
            instance = graph_from_dict(record)
            cost = graph_partition_cost(instance)
        case _:
            raise InvalidInputError(f"instance kind must be one of {INSTANCE_KINDS}, got {kind!r}")

    if "allowed" in record:
        allowed = record["allowed"]
        if not isinstance(allowed, list) or not all(isinstance(x, str) for x in allowed):
            raise InvalidInputError("\"allowed\" must be a list of bitstrings")
        cost = subset_cost(cost, allowed)
        logger.info(f"search set restricted to {cost.metadata['subset_size']} states")

    return cost, instance

"""
k-local cost functions: representation, evaluation, normalization, strict bounds,
and the random graph-partitioning instance family.
"""
import itertools
import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from src.optimization.exceptions import CapacityExceededError, InvalidInputError
from src.optimization.utils import (
    bits_to_index,
    check_enumeration_cap,
    index_to_bits,
    sub_indices,
)

logger = logging.getLogger(__name__)

MARGIN_RELATIVE = 0.5e-3
MARGIN_FLOOR = 1e-9

Bits = str | Sequence[int]


@dataclass(frozen=True)
class LocalTerm:
    """A cost contribution depending on the bits `qubits` only.

    `values[t]` is the contribution for the joint assignment `t` of the term's bits,
    the first qubit being the least significant bit of `t`.
    """

    qubits: tuple[int, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

        if len(self.qubits) == 0:
            raise InvalidInputError("a local term must act on at least one bit")
        if any(q < 0 for q in self.qubits):
            raise InvalidInputError(f"negative bit index in {self.qubits}")
        if any(a >= b for a, b in zip(self.qubits, self.qubits[1:])):
            raise InvalidInputError(
                f"term bit indices must be strictly increasing, got {self.qubits}"
            )
        if len(self.values) != 2 ** len(self.qubits):
            raise InvalidInputError(
                f"term on {len(self.qubits)} bits needs {2 ** len(self.qubits)} values,"
                f" got {len(self.values)}"
            )
        if not all(math.isfinite(v) for v in self.values):
            raise InvalidInputError(f"non-finite value in term on {self.qubits}")

    @property
    def arity(self) -> int:
        return len(self.qubits)


@dataclass(frozen=True)
class CostFunction:
    """n-bit cost written as `constant + sum of local terms`, with strict bounds
    `c_min < C(x) < c_max` for every assignment x."""

    n: int
    constant: float
    terms: tuple[LocalTerm, ...]
    c_min: float
    c_max: float
    metadata: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "constant", float(self.constant))
        object.__setattr__(self, "c_min", float(self.c_min))
        object.__setattr__(self, "c_max", float(self.c_max))

        if self.n < 1:
            raise InvalidInputError(f"a cost function needs at least one bit, got {self.n}")
        if not math.isfinite(self.constant):
            raise InvalidInputError("non-finite constant term")
        for term in self.terms:
            if term.qubits[-1] >= self.n:
                raise InvalidInputError(
                    f"term on {term.qubits} addresses a bit outside of n={self.n}"
                )
        if not (self.c_min < self.c_max):
            raise InvalidInputError(
                f"c_min must be lower than c_max, got ({self.c_min}, {self.c_max})"
            )
        _check_strict_bounds(self)

    @property
    def max_arity(self) -> int:
        return max((term.arity for term in self.terms), default=0)

    @property
    def spread(self) -> float:
        return self.c_max - self.c_min


def _loose_bounds(constant: float, terms: Iterable[LocalTerm]) -> tuple[float, float]:
    terms = list(terms)
    loose_min = constant + sum(min(term.values) for term in terms)
    loose_max = constant + sum(max(term.values) for term in terms)

    return loose_min, loose_max


def _check_strict_bounds(cost: CostFunction) -> None:
    """Bounds are accepted if they strictly contain the term-wise interval,
    or, failing that, if exhaustive evaluation shows they are strict."""
    loose_min, loose_max = _loose_bounds(cost.constant, cost.terms)
    if cost.c_min < loose_min and loose_max < cost.c_max:
        return

    try:
        check_enumeration_cap(cost.n)
    except CapacityExceededError as exc:
        raise InvalidInputError(
            "bounds are tighter than the term-wise interval and cannot be verified"
            f" by enumeration for n={cost.n}"
        ) from exc

    all_values = _evaluate_indices(cost.constant, cost.terms, np.arange(2**cost.n))
    if not (cost.c_min < all_values.min() and all_values.max() < cost.c_max):
        raise InvalidInputError(
            f"bounds ({cost.c_min}, {cost.c_max}) are not strict: costs range over"
            f" [{all_values.min()}, {all_values.max()}]"
        )


def _evaluate_indices(
    constant: float, terms: Sequence[LocalTerm], indices: np.ndarray
) -> np.ndarray:
    values = np.full(indices.shape, constant, dtype=np.float64)
    for term in terms:
        table = np.asarray(term.values, dtype=np.float64)
        values += table[sub_indices(indices, term.qubits)]

    return values


def _as_bits(n: int, x: Bits) -> list[int]:
    if isinstance(x, str):
        if len(x) != n:
            raise InvalidInputError(f"expected a bitstring of length {n}, got {len(x)}")
        bits_to_index(x)
        return [1 if char == "1" else 0 for char in x]

    bits = [int(bit) for bit in x]
    if len(bits) != n:
        raise InvalidInputError(f"expected {n} bits, got {len(bits)}")
    if any(bit not in (0, 1) for bit in bits):
        raise InvalidInputError("bits must be 0 or 1")

    return bits


def evaluate(cost: CostFunction, x: Bits) -> float:
    """Evaluates the cost on one assignment.

    Parameters
    ----------
    cost: CostFunction
        The cost function.
    x: str or sequence of int
        Bitstring of length n ('0'/'1' characters, bit 0 first) or sequence of bits.

    Returns
    -------
    float
        `constant + sum of the term values selected by x`.
    """
    bits = _as_bits(cost.n, x)

    total = cost.constant
    for term in cost.terms:
        table_index = 0
        for position, qubit in enumerate(term.qubits):
            table_index |= bits[qubit] << position
        total += term.values[table_index]

    return total


def evaluate_all(cost: CostFunction) -> np.ndarray:
    """Evaluates the cost on every basis index 0 .. 2**n - 1."""
    check_enumeration_cap(cost.n)
    return _evaluate_indices(cost.constant, cost.terms, np.arange(2**cost.n))


def normalize_value(value: float, c_min: float, c_max: float) -> float:
    """Maps a cost value into the open interval (0, 1)."""
    if not (c_min < value < c_max):
        raise InvalidInputError(
            f"cost value {value} is not strictly inside the bounds ({c_min}, {c_max})"
        )

    return (value - c_min) / (c_max - c_min)


def normalize(cost: CostFunction, x: Bits) -> float:
    return normalize_value(evaluate(cost, x), cost.c_min, cost.c_max)


def normalize_all(cost: CostFunction) -> np.ndarray:
    """Normalized cost C_nor over every basis index, strictly inside (0, 1)."""
    return (evaluate_all(cost) - cost.c_min) / cost.spread


def default_margin(loose_min: float, loose_max: float) -> float:
    return max(MARGIN_RELATIVE * (loose_max - loose_min), MARGIN_FLOOR)


def derive_bounds(
    constant: float, terms: Sequence[LocalTerm], margin: float | None = None
) -> tuple[float, float]:
    """Builds strict bounds from the term-wise minima and maxima.

    Parameters
    ----------
    constant: float
        The 0-local term.
    terms: sequence of LocalTerm
        The local terms.
    margin: float
        Optional. Additive margin (> 0) on both sides. Defaults to
        0.5e-3 times the loose interval width, with a floor of 1e-9.

    Returns
    -------
    tuple of two floats
        `(c_min, c_max)`.
    """
    if not math.isfinite(constant) or not all(
        math.isfinite(v) for term in terms for v in term.values
    ):
        raise InvalidInputError("cannot derive bounds from non-finite values")

    loose_min, loose_max = _loose_bounds(constant, terms)
    if margin is None:
        margin = default_margin(loose_min, loose_max)
    if not margin > 0:
        raise InvalidInputError(f"margin must be positive, got {margin}")

    return loose_min - margin, loose_max + margin


def canonicalize_terms(
    raw_terms: Iterable[tuple[Sequence[int], Sequence[float]]]
) -> list[LocalTerm]:
    """Folds raw terms into one table per sorted qubit subset.

    Raw terms may list their qubits in any order; tables are re-indexed so that the
    smallest qubit becomes the least significant bit. Terms sharing a subset are summed.
    """
    tables: dict[tuple[int, ...], np.ndarray] = {}
    for qubits, values in raw_terms:
        qubits = tuple(int(q) for q in qubits)
        values = np.asarray(values, dtype=np.float64)
        if len(set(qubits)) != len(qubits):
            raise InvalidInputError(f"repeated bit in term {qubits}")
        if values.shape != (2 ** len(qubits),):
            raise InvalidInputError(
                f"term on {len(qubits)} bits needs {2 ** len(qubits)} values"
            )

        order = sorted(range(len(qubits)), key=lambda position: qubits[position])
        sorted_qubits = tuple(qubits[position] for position in order)
        # sorted_index bit `new` is raw bit `order[new]`
        raw_index = np.zeros(len(values), dtype=np.int64)
        for new_position, old_position in enumerate(order):
            raw_index |= ((np.arange(len(values)) >> new_position) & 1) << old_position
        reindexed = values[raw_index]

        if sorted_qubits in tables:
            tables[sorted_qubits] = tables[sorted_qubits] + reindexed
        else:
            tables[sorted_qubits] = reindexed

    return [
        LocalTerm(qubits=qubits, values=tuple(table.tolist()))
        for qubits, table in sorted(tables.items(), key=lambda e: (len(e[0]), e[0]))
    ]


def build_cost(
    n: int,
    constant: float,
    terms: Sequence[LocalTerm],
    margin: float | None = None,
    metadata: dict | None = None,
) -> CostFunction:
    c_min, c_max = derive_bounds(constant, terms, margin)
    return CostFunction(
        n=n,
        constant=constant,
        terms=tuple(terms),
        c_min=c_min,
        c_max=c_max,
        metadata=metadata or {},
    )


def with_bounds(cost: CostFunction, c_min: float, c_max: float) -> CostFunction:
    """Replaces the bounds; raises if the new ones cannot be shown to be strict."""
    return replace(cost, c_min=c_min, c_max=c_max)


def random_local_cost(
    n: int, m: int, term_density: float = 0.5, seed: int = 0
) -> CostFunction:
    """Draws a reproducible random cost with terms of arity 1 to m.

    Each of the `C(n, k)` bit subsets of size k <= m carries a term with probability
    `term_density`; term values are uniform in [-1, 1).
    """
    if not 1 <= m <= n:
        raise InvalidInputError(f"term arity m must satisfy 1 <= m <= n, got m={m}, n={n}")
    if not 0 <= term_density <= 1:
        raise InvalidInputError(f"term density must be in [0, 1], got {term_density}")

    rng = np.random.default_rng(seed)
    terms = []
    for k in range(1, m + 1):
        for qubits in itertools.combinations(range(n), k):
            if rng.random() < term_density:
                values = rng.uniform(-1.0, 1.0, size=2**k)
                terms.append(LocalTerm(qubits=qubits, values=tuple(values.tolist())))

    return build_cost(
        n,
        0.0,
        terms,
        metadata={
            "generator": "random_local_cost",
            "m": m,
            "term_density": term_density,
            "seed": seed,
        },
    )


@dataclass(frozen=True)
class GraphPartitionInstance:
    """Balanced bipartition of a graph with `v` vertices (v even).

    `lam` is the weight of the soft balance penalty; `p` is the edge probability
    used at generation and only enters the constant of the cost.
    """

    v: int
    edges: tuple[tuple[int, int], ...]
    j: float = 1.0
    lam: float = 0.0
    p: float = 0.5

    def __post_init__(self):
        edges = tuple(sorted((min(a, b), max(a, b)) for a, b in self.edges))
        object.__setattr__(self, "edges", edges)

        if self.v < 2 or self.v % 2 != 0:
            raise InvalidInputError(f"vertex count must be even and >= 2, got {self.v}")
        if any(a == b for a, b in edges):
            raise InvalidInputError("self-loops are not allowed")
        if len(set(edges)) != len(edges):
            raise InvalidInputError("duplicate edges are not allowed")
        if any(a < 0 or b >= self.v for a, b in edges):
            raise InvalidInputError(f"edge endpoint outside of 0..{self.v - 1}")
        if not self.j > 0:
            raise InvalidInputError(f"coupling J must be positive, got {self.j}")
        if not self.lam >= 0:
            raise InvalidInputError(f"balance penalty must be >= 0, got {self.lam}")
        if not 0 <= self.p <= 1:
            raise InvalidInputError(f"edge probability must be in [0, 1], got {self.p}")

    def to_networkx(self) -> nx.Graph:
        graph = nx.empty_graph(self.v)
        graph.add_edges_from(self.edges)
        return graph


def random_graph(
    v: int, p: float, seed: int = 0, j: float = 1.0, lam: float = 0.0
) -> GraphPartitionInstance:
    """Random graph where each of the v(v-1)/2 vertex pairs is an edge with probability p."""
    if v < 2 or v % 2 != 0:
        raise InvalidInputError(f"vertex count must be even and >= 2, got {v}")
    if not 0 <= p <= 1:
        raise InvalidInputError(f"edge probability must be in [0, 1], got {p}")

    graph = nx.gnp_random_graph(v, p, seed=seed)

    return GraphPartitionInstance(v=v, edges=tuple(graph.edges()), j=j, lam=lam, p=p)


def graph_partition_cost(
    instance: GraphPartitionInstance, margin: float | None = None
) -> CostFunction:
    """Cost of a bipartition with spins s_i = 2 q_i - 1:

    `V(V-1)p/4 - (1/2J) sum_{i<j} J_ij s_i s_j + (lam/2) (sum_i s_i)^2`

    Expanding the square gives `lam V / 2 + lam sum_{i<j} s_i s_j`, so every vertex
    pair carries one 2-local term with coefficient `lam - J_ij / 2J` on `s_i s_j`.
    """
    started_time = time.time()

    edge_set = set(instance.edges)
    constant = instance.v * (instance.v - 1) * instance.p / 4 + instance.lam * instance.v / 2

    # s_i s_j over (q_i, q_j) = (0, 0), (1, 0), (0, 1), (1, 1)
    spin_product = np.array([1.0, -1.0, -1.0, 1.0])
    terms = []
    for i, j in itertools.combinations(range(instance.v), 2):
        coupling = instance.j if (i, j) in edge_set else 0.0
        coefficient = instance.lam - coupling / (2 * instance.j)
        if coefficient != 0.0:
            terms.append(
                LocalTerm(qubits=(i, j), values=tuple((coefficient * spin_product).tolist()))
            )

    cost = build_cost(
        instance.v,
        constant,
        terms,
        margin,
        metadata={"generator": "graph_partition_cost"},
    )
    logger.debug(f"graph_partition_cost duration: {time.time()-started_time}")

    return cost


def cut_size(instance: GraphPartitionInstance, x: Bits) -> int:
    """Number of edges joining the two sets of the partition x."""
    bits = _as_bits(instance.v, x)
    ones = [vertex for vertex, bit in enumerate(bits) if bit]
    return int(nx.cut_size(instance.to_networkx(), ones))


def is_balanced(x: Bits) -> bool:
    bits = [1 if char == "1" else 0 for char in x] if isinstance(x, str) else list(x)
    return 2 * sum(bits) == len(bits)


def subset_cost(cost: CostFunction, allowed: Iterable[Bits]) -> CostFunction:
    """Emulates a search set smaller than 2**n.

    States outside `allowed` are lifted to the term-wise maximum of the cost (just
    below c_max) with one n-local penalty term; the bounds are kept.
    """
    check_enumeration_cap(cost.n)

    allowed_indices = {
        sum(bit << i for i, bit in enumerate(_as_bits(cost.n, x))) for x in allowed
    }
    if not allowed_indices:
        raise InvalidInputError("the allowed subset must not be empty")

    _, loose_max = _loose_bounds(cost.constant, cost.terms)
    all_values = evaluate_all(cost)
    penalty = loose_max - all_values
    penalty[list(allowed_indices)] = 0.0

    terms = list(cost.terms) + [
        LocalTerm(qubits=tuple(range(cost.n)), values=tuple(penalty.tolist()))
    ]

    return CostFunction(
        n=cost.n,
        constant=cost.constant,
        terms=tuple(terms),
        c_min=cost.c_min,
        c_max=cost.c_max,
        metadata={**cost.metadata, "subset_size": len(allowed_indices)},
    )


def all_bitstrings(n: int) -> list[str]:
    check_enumeration_cap(n)
    return [index_to_bits(index, n) for index in range(2**n)]


def argmin_indices(cost: CostFunction, tolerance: float = 1e-12) -> tuple[np.ndarray, float]:
    """Basis indices of all minimum-cost states, and the minimum.

    Costs within `tolerance * (c_max - c_min)` of the minimum count as minimal, so
    rounding in the term sums does not split a degenerate ground level.
    """
    all_values = evaluate_all(cost)
    minimum = float(all_values.min())
    indices = np.flatnonzero(all_values <= minimum + tolerance * cost.spread)

    return indices, minimum

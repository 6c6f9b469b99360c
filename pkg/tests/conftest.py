import numpy as np
import pytest

from src.optimization.cost import (
    CostFunction,
    GraphPartitionInstance,
    LocalTerm,
    graph_partition_cost,
)


@pytest.fixture
def two_state_cost() -> CostFunction:
    """One bit, C(0) = 0 and C(1) = 1, bounds (-0.5, 1.5): C_nor = 0.25 and 0.75."""
    return CostFunction(
        n=1,
        constant=0.0,
        terms=(LocalTerm(qubits=(0,), values=(0.0, 1.0)),),
        c_min=-0.5,
        c_max=1.5,
    )


@pytest.fixture
def k4_instance() -> GraphPartitionInstance:
    edges = tuple((i, j) for i in range(4) for j in range(i + 1, 4))
    return GraphPartitionInstance(v=4, edges=edges, j=1.0, lam=0.0, p=1.0)


@pytest.fixture
def k4_cost(k4_instance) -> CostFunction:
    return graph_partition_cost(k4_instance)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)

"""
Utility functions used by the optimization package.

Bit convention used everywhere: character `i` of a bitstring is the value of bit
`q_i`, and the basis index of the bitstring is `sum(q_i << i)`.
"""
import numpy as np

from src.config import get_max_enumeration_bits
from src.optimization.exceptions import CapacityExceededError, InvalidInputError


def bits_to_index(x: str) -> int:
    """Converts a bitstring ('0'/'1' characters, bit 0 first) to its basis index."""
    if any(char not in "01" for char in x):
        raise InvalidInputError(f"bitstring must only contain '0' and '1', got {x!r}")

    return sum(1 << i for i, char in enumerate(x) if char == "1")


def index_to_bits(index: int, n: int) -> str:
    """Converts a basis index to a bitstring of length n (bit 0 first)."""
    return "".join("1" if (index >> i) & 1 else "0" for i in range(n))


def sub_indices(indices: np.ndarray, qubits: tuple[int, ...]) -> np.ndarray:
    """Gathers the bits of `indices` found on `qubits` into a compact index.

    Parameters
    ----------
    indices: ndarray
        Integer basis indices.
    qubits: tuple of int
        Bit positions to extract. The first one becomes the least significant bit.

    Returns
    -------
    ndarray
        Indices into a table of size 2**len(qubits).
    """
    table_index = np.zeros_like(indices)
    for position, qubit in enumerate(qubits):
        table_index |= ((indices >> qubit) & 1) << position

    return table_index


def check_enumeration_cap(n: int) -> None:
    max_bits = get_max_enumeration_bits()
    if n > max_bits:
        raise CapacityExceededError(
            f"exhaustive enumeration over {n} bits exceeds the cap of {max_bits} bits"
        )


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent, reproducible RNG stream for one trial."""
    return np.random.default_rng([master_seed, trial_index])

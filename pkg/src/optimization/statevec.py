"""
Dense state-vector engine for `n_search` search qubits plus `n_control` control qubits.

Index convention: qubit q is bit q of the basis index. Search qubits occupy the
low-order positions 0 .. n_search - 1, control qubits the high-order positions
n_search .. n_search + n_control - 1. The amplitude of |x; J> is therefore found at
index `x + 2**n_search * J`.
"""
import functools
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from src.config import get_max_qubits
from src.optimization.cost import CostFunction, normalize_all
from src.optimization.exceptions import CapacityExceededError, InvalidInputError
from src.optimization.utils import sub_indices

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-10
UNIT_MODULUS_TOLERANCE = 1e-12


@dataclass(frozen=True)
class QuantumState:
    n_search: int
    n_control: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if amplitudes.shape != (2**self.num_qubits,):
            raise InvalidInputError(
                f"expected {2 ** self.num_qubits} amplitudes, got {amplitudes.shape}"
            )
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def num_qubits(self) -> int:
        return self.n_search + self.n_control

    @property
    def dimension(self) -> int:
        return 2**self.num_qubits

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    @classmethod
    def from_amplitudes(
        cls, n_search: int, n_control: int, amplitudes: np.ndarray
    ) -> "QuantumState":
        """Builds a state from user amplitudes, checking size and normalization."""
        check_capacity(n_search, n_control)
        state = cls(n_search, n_control, np.array(amplitudes, dtype=np.complex128))
        if abs(state.norm() - 1.0) > NORM_TOLERANCE:
            raise InvalidInputError(f"amplitudes are not normalized (norm {state.norm()})")

        return state


@dataclass(frozen=True)
class PhaseTable:
    """Diagonal of a k-qubit phase gate; entry t is the phase of the joint
    assignment t of the target qubits (first target = least significant bit)."""

    phases: np.ndarray

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=np.complex128)
        arity = int(np.log2(len(phases))) if len(phases) else -1
        if len(phases) == 0 or 2**arity != len(phases):
            raise InvalidInputError("a phase table needs 2**k entries")
        if np.any(np.abs(np.abs(phases) - 1.0) > UNIT_MODULUS_TOLERANCE):
            raise InvalidInputError("phase table entries must have unit modulus")
        phases.setflags(write=False)
        object.__setattr__(self, "phases", phases)

    @property
    def arity(self) -> int:
        return int(np.log2(len(self.phases)))

    def conjugate(self) -> "PhaseTable":
        return PhaseTable(np.conj(self.phases))

    def power(self, exponent: int) -> "PhaseTable":
        return PhaseTable(self.phases**exponent)


GateTables = list[tuple[tuple[int, ...], PhaseTable]]


def check_capacity(n_search: int, n_control: int) -> None:
    max_qubits = get_max_qubits()
    if n_search + n_control > max_qubits:
        raise CapacityExceededError(
            f"{n_search} search + {n_control} control qubits exceed the dense"
            f" amplitude cap of {max_qubits} qubits; use the closed-form mode instead"
        )


@functools.lru_cache(maxsize=16)
def _table_indices(num_qubits: int, qubits: tuple[int, ...]) -> np.ndarray:
    indices = sub_indices(np.arange(2**num_qubits, dtype=np.int64), qubits)
    indices.setflags(write=False)
    return indices


def _check_qubits(state: QuantumState, qubits: tuple[int, ...]) -> None:
    if len(set(qubits)) != len(qubits):
        raise InvalidInputError(f"repeated qubit in {qubits}")
    for qubit in qubits:
        if not 0 <= qubit < state.num_qubits:
            raise InvalidInputError(
                f"qubit {qubit} out of range for a {state.num_qubits}-qubit state"
            )


def uniform_superposition(n_search: int, n_control: int = 0) -> QuantumState:
    """Uniform superposition of all 2**n_search search states, control register in |0...0>."""
    if n_search < 1 or n_control < 0:
        raise InvalidInputError(
            f"need n_search >= 1 and n_control >= 0, got ({n_search}, {n_control})"
        )
    check_capacity(n_search, n_control)

    amplitudes = np.zeros(2 ** (n_search + n_control), dtype=np.complex128)
    amplitudes[: 2**n_search] = 1 / np.sqrt(2**n_search)

    return QuantumState(n_search, n_control, amplitudes)


def basis_state(n_search: int, n_control: int, index: int) -> QuantumState:
    check_capacity(n_search, n_control)
    dimension = 2 ** (n_search + n_control)
    if int(index) != index or not 0 <= index < dimension:
        raise InvalidInputError(f"basis index must be in 0..{dimension - 1}, got {index}")

    amplitudes = np.zeros(2 ** (n_search + n_control), dtype=np.complex128)
    amplitudes[index] = 1.0

    return QuantumState(n_search, n_control, amplitudes)


def apply_hadamard(state: QuantumState, qubit: int) -> QuantumState:
    _check_qubits(state, (qubit,))

    # axis 1 of this view is the addressed qubit
    view = state.amplitudes.reshape(-1, 2, 2**qubit)
    low, high = view[:, 0, :], view[:, 1, :]
    new = np.stack([low + high, low - high], axis=1) / np.sqrt(2)

    return QuantumState(state.n_search, state.n_control, new.reshape(-1))


def build_phase_tables(cost: CostFunction, sign: int = 1) -> GateTables:
    """Diagonal gates whose product multiplies |x> by exp(sign i pi/2 C_nor(x)).

    One table per term plus one (acting on no qubit) for the constant. The offset
    c_min is split evenly over the M tables: C^k_nor = (C^k - c_min / M) / (c_max - c_min).
    """
    if sign not in (1, -1):
        raise InvalidInputError(f"sign must be +1 or -1, got {sign}")

    num_tables = len(cost.terms) + 1
    offset = cost.c_min / num_tables

    def to_table(values) -> PhaseTable:
        normalized = (np.asarray(values, dtype=np.float64) - offset) / cost.spread
        return PhaseTable(np.exp(sign * 1j * np.pi / 2 * normalized))

    tables = [((), to_table([cost.constant]))]
    tables += [(term.qubits, to_table(term.values)) for term in cost.terms]

    return tables


def corrupt_phase_tables(
    tables: GateTables, index: int = -1, delta: float = 0.1
) -> GateTables:
    """Copy of `tables` where entry 0 of table `index` gets an extra phase `delta`."""
    corrupted = list(tables)
    qubits, table = corrupted[index]
    phases = np.array(table.phases)
    phases[0] *= np.exp(1j * delta)
    corrupted[index] = (qubits, PhaseTable(phases))

    return corrupted


def apply_diagonal(
    state: QuantumState, qubits: tuple[int, ...], table: PhaseTable
) -> QuantumState:
    qubits = tuple(qubits)
    _check_qubits(state, qubits)
    if table.arity != len(qubits):
        raise InvalidInputError(
            f"table of arity {table.arity} applied to {len(qubits)} qubits"
        )

    factors = table.phases[_table_indices(state.num_qubits, qubits)]

    return QuantumState(state.n_search, state.n_control, state.amplitudes * factors)


def apply_controlled_diagonal(
    state: QuantumState, control_qubit: int, qubits: tuple[int, ...], table: PhaseTable
) -> QuantumState:
    """Applies `table` on `qubits` only where `control_qubit` is 1."""
    qubits = tuple(qubits)
    if control_qubit in qubits:
        raise InvalidInputError(f"control qubit {control_qubit} is also a target")
    _check_qubits(state, qubits + (control_qubit,))
    if table.arity != len(qubits):
        raise InvalidInputError(
            f"table of arity {table.arity} applied to {len(qubits)} qubits"
        )

    control_on = _table_indices(state.num_qubits, (control_qubit,)) == 1
    factors = np.where(
        control_on, table.phases[_table_indices(state.num_qubits, qubits)], 1.0
    )

    return QuantumState(state.n_search, state.n_control, state.amplitudes * factors)


def apply_u_pm(
    state: QuantumState,
    control_qubit: int,
    cost: CostFunction,
    tables: GateTables | None = None,
) -> QuantumState:
    """U on the search register where the control qubit is 0, U^-1 where it is 1.

    Realized gate by gate: every G^k unconditionally, followed by a controlled
    (G^k)^-2.
    """
    if cost.n != state.n_search:
        raise InvalidInputError(
            f"cost on {cost.n} bits applied to a {state.n_search}-qubit search register"
        )
    if not state.n_search <= control_qubit < state.num_qubits:
        raise InvalidInputError(f"qubit {control_qubit} is not a control qubit")

    if tables is None:
        tables = build_phase_tables(cost, 1)

    for qubits, table in tables:
        state = apply_diagonal(state, qubits, table)
        state = apply_controlled_diagonal(state, control_qubit, qubits, table.power(-2))

    return state


def apply_unitary_phase(state: QuantumState, cost: CostFunction, sign: int = 1) -> QuantumState:
    """Direct per-basis multiplication of the search register by exp(sign i pi/2 C_nor(x))."""
    if cost.n != state.n_search:
        raise InvalidInputError("cost and search register sizes differ")

    phases = np.exp(sign * 1j * np.pi / 2 * normalize_all(cost))
    factors = np.tile(phases, 2**state.n_control)

    return QuantumState(state.n_search, state.n_control, state.amplitudes * factors)


def marginal_probabilities(state: QuantumState, qubits: tuple[int, ...]) -> np.ndarray:
    """Born-rule marginal over `qubits`; entry t is the probability of joint outcome t
    (first listed qubit = least significant bit)."""
    qubits = tuple(qubits)
    _check_qubits(state, qubits)

    probabilities = np.abs(state.amplitudes) ** 2
    marginal = np.bincount(
        _table_indices(state.num_qubits, qubits),
        weights=probabilities,
        minlength=2 ** len(qubits),
    )

    return marginal


def control_qubits(state: QuantumState) -> tuple[int, ...]:
    return tuple(range(state.n_search, state.num_qubits))


def search_branch(state: QuantumState, control_pattern: int) -> np.ndarray:
    """Search-register amplitudes (not renormalized) for a fixed control pattern."""
    size = 2**state.n_search
    return state.amplitudes[control_pattern * size : (control_pattern + 1) * size]


def fidelity(a: QuantumState, b: QuantumState) -> float:
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def max_deviation(
    a: QuantumState | np.ndarray,
    b: QuantumState | np.ndarray,
    modulo_global_phase: bool = False,
) -> float:
    a = a.amplitudes if isinstance(a, QuantumState) else np.asarray(a)
    b = b.amplitudes if isinstance(b, QuantumState) else np.asarray(b)
    if a.shape != b.shape:
        raise InvalidInputError(f"shape mismatch {a.shape} != {b.shape}")

    if modulo_global_phase:
        overlap = np.vdot(b, a)
        if abs(overlap) > 0:
            b = b * overlap / abs(overlap)

    return float(np.max(np.abs(a - b)))


def dump_amplitudes(state: QuantumState, path: Path) -> None:
    """Debug dump: little-endian interleaved real/imaginary float64, basis index order."""
    state.amplitudes.astype("<c16").tofile(path)


def load_amplitudes(path: Path, n_search: int, n_control: int) -> QuantumState:
    return QuantumState.from_amplitudes(
        n_search, n_control, np.fromfile(path, dtype="<c16")
    )

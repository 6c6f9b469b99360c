"""
The optimization circuit: for each control qubit c = 1 .. b apply H_c, U±_cS, H_c to
|S; 0...0>, then post-select on the all-zero control register.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np

from src.config import get_max_repetitions
from src.optimization import ensemble
from src.optimization.cost import CostFunction, argmin_indices, evaluate, normalize_all
from src.optimization.exceptions import (
    DegenerateProjectionError,
    InvalidInputError,
    RepetitionLimitError,
)
from src.optimization.statevec import (
    GateTables,
    QuantumState,
    apply_hadamard,
    apply_u_pm,
    build_phase_tables,
    check_capacity,
    control_qubits,
    marginal_probabilities,
    search_branch,
    uniform_superposition,
)
from src.optimization.utils import index_to_bits, trial_rng

logger = logging.getLogger(__name__)

Mode = Literal["gate_level", "closed_form"]
MODES = ("gate_level", "closed_form")


@dataclass(frozen=True)
class RunOutcome:
    repetitions: int
    result: str
    cost_value: float

    def __post_init__(self):
        if self.repetitions < 1:
            raise InvalidInputError("a run needs at least one repetition")


def _check_b(b: int, minimum: int = 1) -> None:
    if int(b) != b or b < minimum:
        raise InvalidInputError(
            f"the number of control qubits must be an integer >= {minimum}, got {b}"
        )


def circuit_trace(
    cost: CostFunction, b: int, tables: GateTables | None = None
) -> list[tuple[str, QuantumState]]:
    """All intermediate states of the circuit, labelled by the block just applied."""
    _check_b(b)
    check_capacity(cost.n, b)

    if tables is None:
        tables = build_phase_tables(cost, 1)

    state = uniform_superposition(cost.n, b)
    trace = [("initial", state)]
    for control_index in range(b):
        qubit = cost.n + control_index
        state = apply_hadamard(state, qubit)
        trace.append((f"hadamard_{control_index + 1}", state))
        state = apply_u_pm(state, qubit, cost, tables)
        trace.append((f"u_pm_{control_index + 1}", state))
        state = apply_hadamard(state, qubit)
        trace.append((f"hadamard_{control_index + 1}_again", state))

    return trace


def run_circuit(
    cost: CostFunction, b: int, tables: GateTables | None = None
) -> QuantumState:
    """Gate-level simulation of the deterministic part; returns the final state."""
    started_time = time.time()

    final_state = circuit_trace(cost, b, tables)[-1][1]

    logger.info(f"run_circuit duration: {time.time()-started_time}")

    return final_state


def _popcounts(b: int) -> np.ndarray:
    return np.array([bin(pattern).count("1") for pattern in range(2**b)])


def closed_form_final_state(cost: CostFunction, b: int) -> QuantumState:
    """Final state written down directly.

    The amplitude of |x; J> is cos^(b-i)(pi/2 C_nor(x)) (i sin(pi/2 C_nor(x)))^i / sqrt(N)
    with i = popcount(J). The factor i^i is the exact phase produced by the gates;
    it leaves every probability unchanged.
    """
    _check_b(b, minimum=0)
    check_capacity(cost.n, b)

    angles = np.pi / 2 * normalize_all(cost)
    cosines, sines = np.cos(angles), 1j * np.sin(angles)
    popcounts = _popcounts(b)[:, None]

    amplitudes = cosines[None, :] ** (b - popcounts) * sines[None, :] ** popcounts
    amplitudes = amplitudes / np.sqrt(2**cost.n)

    return QuantumState(cost.n, b, amplitudes.reshape(-1))


def postselect_zero(state: QuantumState, b: int | None = None) -> tuple[QuantumState, float]:
    """Projects onto the all-zero control register.

    Returns
    -------
    tuple
        The renormalized search-register state and the probability of the projection.
    """
    if b is not None and b != state.n_control:
        raise InvalidInputError(f"state has {state.n_control} control qubits, not {b}")

    branch = search_branch(state, 0)
    probability = float(np.sum(np.abs(branch) ** 2))
    if probability <= 0.0:
        raise DegenerateProjectionError("the all-zero control branch has zero weight")

    return QuantumState(state.n_search, 0, branch / np.sqrt(probability)), probability


def _draw(cumulative: np.ndarray, rng: np.random.Generator) -> int:
    index = int(np.searchsorted(cumulative, rng.random(), side="right"))
    return min(index, len(cumulative) - 1)


class CircuitSampler:
    """Simulates the repeat-until-success protocol for a fixed cost and b.

    The deterministic part does not depend on the trial, so its output distributions
    are computed once:

    - gate_level: the control-register marginal of the simulated final state, and the
      post-selected search distribution;
    - closed_form: P0_b and P_b from the ensemble formulas, without materializing
      the control register.
    """

    def __init__(
        self,
        cost: CostFunction,
        b: int,
        mode: Mode = "closed_form",
        max_repetitions: int | None = None,
    ):
        _check_b(b)
        if mode not in MODES:
            raise InvalidInputError(f"mode must be one of {MODES}, got {mode!r}")

        self.cost = cost
        self.b = b
        self.mode = mode
        self.max_repetitions = max_repetitions or get_max_repetitions()

        match mode:
            case "gate_level":
                final_state = run_circuit(cost, b)
                control_marginal = marginal_probabilities(
                    final_state, control_qubits(final_state)
                )
                search_state, self.p0b = postselect_zero(final_state)
                self.distribution = np.abs(search_state.amplitudes) ** 2
                self._control_cumulative = np.cumsum(control_marginal)
            case "closed_form":
                _, self.p0b = ensemble.partition_function(cost, b)
                self.distribution = ensemble.boltzmann_distribution(cost, b)

        self._search_cumulative = np.cumsum(self.distribution)

    def _count_repetitions(self, rng: np.random.Generator) -> int | None:
        if self.mode == "closed_form":
            if self.p0b <= 0:
                return None
            repetitions = int(rng.geometric(self.p0b))
            return repetitions if repetitions <= self.max_repetitions else None

        # one joint measurement of the b control qubits per repetition
        for repetition in range(1, self.max_repetitions + 1):
            if _draw(self._control_cumulative, rng) == 0:
                return repetition

        return None

    def sample(self, rng: np.random.Generator, trial_index: int | None = None) -> RunOutcome:
        repetitions = self._count_repetitions(rng)
        if repetitions is None:
            raise RepetitionLimitError(self.max_repetitions, trial_index)

        result = index_to_bits(_draw(self._search_cumulative, rng), self.cost.n)

        return RunOutcome(
            repetitions=repetitions,
            result=result,
            cost_value=evaluate(self.cost, result),
        )


def sample_run(
    cost: CostFunction,
    b: int,
    rng: np.random.Generator,
    mode: Mode = "closed_form",
    sampler: CircuitSampler | None = None,
) -> RunOutcome:
    """One complete run: repeat the deterministic part until the control register reads
    all zeros, then measure the search register."""
    if sampler is None:
        sampler = CircuitSampler(cost, b, mode)

    return sampler.sample(rng)


def sample_many(
    cost: CostFunction,
    b: int,
    trials: int,
    mode: Mode = "closed_form",
    seed: int = 0,
    threads: int = 1,
) -> list[dict]:
    """Runs `trials` independent runs, trial i using the RNG stream (seed, i).

    Returns
    -------
    list of dicts
        One run report per trial, ordered by trial index: b, mode, trial, the master
        seed, then repetitions, result and cost. Trials that hit the repetition
        cutoff carry an "error" entry instead of the last three.
    """
    started_time = time.time()

    sampler = CircuitSampler(cost, b, mode)

    def run_trial(trial_index: int) -> dict:
        run = {"b": b, "mode": mode, "trial": trial_index, "seed": seed}
        try:
            outcome = sampler.sample(trial_rng(seed, trial_index), trial_index)
        except RepetitionLimitError as exc:
            logger.warning(str(exc))
            return run | {"error": str(exc)}

        return run | {
            "repetitions": outcome.repetitions,
            "result": outcome.result,
            "cost": outcome.cost_value,
        }

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            records = list(executor.map(run_trial, range(trials)))
    else:
        records = [run_trial(trial_index) for trial_index in range(trials)]

    logger.info(f"sample_many duration: {time.time()-started_time}")

    return records


def argmin_mass(cost: CostFunction, b: float) -> float:
    """Post-selected probability of the set of minimum-cost states."""
    indices, _ = argmin_indices(cost)
    return float(ensemble.boltzmann_distribution(cost, b)[indices].sum())


def concentration_b(cost: CostFunction, mass: float = 0.999, b_max: int = 2**20) -> int:
    """Smallest integer b whose post-selected mass on the argmin set exceeds `mass`.

    The argmin mass grows with b, so a doubling search followed by a bisection finds it.
    """
    if not 0 < mass < 1:
        raise InvalidInputError(f"mass must be in (0, 1), got {mass}")

    high = 1
    while argmin_mass(cost, high) <= mass:
        high *= 2
        if high > b_max:
            raise InvalidInputError(f"no b <= {b_max} concentrates a mass of {mass}")

    low = high // 2
    while high - low > 1:
        middle = (low + high) // 2
        if argmin_mass(cost, middle) > mass:
            high = middle
        else:
            low = middle

    logger.info(f"argmin mass exceeds {mass} from b={high}")

    return high

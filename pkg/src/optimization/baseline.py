"""
Classical references: exhaustive minimization, simulated annealing with exact
evaluation counting, and the load comparison against the quantum heuristic.
"""
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from src.optimization import ensemble
from src.optimization.circuit import Mode, argmin_mass, sample_many
from src.optimization.cost import Bits, CostFunction, argmin_indices, evaluate
from src.optimization.exceptions import InvalidInputError
from src.optimization.utils import index_to_bits, trial_rng

logger = logging.getLogger(__name__)

LOAD_ACCOUNTING_NOTE = (
    "Quantum load counts one unit per execution of the deterministic part, which "
    "evaluates the cost on all states in parallel; the expected number of executions "
    "is 1/P0_b. Classical load counts every single cost-function evaluation."
)


@dataclass(frozen=True)
class BaselineReport:
    best_bitstring: str
    best_cost: float
    evaluations: int
    method: str
    seed: int | None = None
    trial: int | None = None


@dataclass(frozen=True)
class AnnealingSchedule:
    """Geometric cooling from t_start towards t_end.

    With an explicit `ratio`, the temperature of step k is max(t_start * ratio**k, t_end).
    Without it, the ratio is chosen so that the last step runs exactly at t_end.
    """

    t_start: float = 1.0
    t_end: float = 1e-3
    ratio: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.t_start) and math.isfinite(self.t_end)):
            raise InvalidInputError("schedule temperatures must be finite")
        if self.t_start < 0 or self.t_end < 0 or self.t_end > self.t_start:
            raise InvalidInputError(
                f"invalid schedule: need 0 <= t_end <= t_start, got ({self.t_start}, {self.t_end})"
            )
        if self.ratio is not None and not 0 < self.ratio <= 1:
            raise InvalidInputError(f"cooling ratio must be in (0, 1], got {self.ratio}")
        if self.ratio is None and self.t_end == 0 and self.t_start > 0:
            raise InvalidInputError("a derived geometric ratio needs t_end > 0")

    def temperatures(self, n_steps: int) -> np.ndarray:
        if n_steps < 0:
            raise InvalidInputError(f"number of steps must be >= 0, got {n_steps}")
        if self.t_start == 0:
            return np.zeros(n_steps)

        steps = np.arange(n_steps)
        if self.ratio is not None:
            return np.maximum(self.t_start * self.ratio**steps, self.t_end)
        if n_steps == 1:
            return np.array([self.t_start])

        return self.t_start * (self.t_end / self.t_start) ** (steps / (n_steps - 1))


@dataclass(frozen=True)
class SAParams:
    t_start: float = 1.0
    t_end: float = 1e-3
    ratio: float | None = None
    n_steps: int = 2000
    max_matched_steps: int = 4096

    def __post_init__(self):
        if self.n_steps < 0 or self.max_matched_steps < 1:
            raise InvalidInputError(
                f"invalid step counts ({self.n_steps}, {self.max_matched_steps})"
            )
        AnnealingSchedule(self.t_start, self.t_end, self.ratio)

    @property
    def schedule(self) -> AnnealingSchedule:
        return AnnealingSchedule(self.t_start, self.t_end, self.ratio)


class CountingCost:
    """Cost wrapper counting every evaluation."""

    def __init__(self, cost: CostFunction):
        self.cost = cost
        self.evaluations = 0

    def evaluate(self, x: Bits) -> float:
        self.evaluations += 1
        return evaluate(self.cost, x)


def brute_force_min(cost: CostFunction) -> tuple[list[str], float]:
    """Exact minimum and complete argmin set by exhaustive evaluation."""
    indices, minimum = argmin_indices(cost)
    return [index_to_bits(int(index), cost.n) for index in indices], minimum


def simulated_annealing(
    cost: CostFunction,
    schedule: AnnealingSchedule,
    n_steps: int,
    rng: np.random.Generator,
    seed: int | None = None,
    trial: int | None = None,
) -> BaselineReport:
    """Single-bit-flip Metropolis chain under a geometric cooling schedule.

    The chain starts from a uniformly random assignment and proposes one random bit
    flip per step; the best assignment seen is returned. The cost is evaluated once
    for the initial state and once per proposal, i.e. n_steps + 1 times.
    """
    counting_cost = CountingCost(cost)

    state = [int(bit) for bit in rng.integers(0, 2, size=cost.n)]
    current = counting_cost.evaluate(state)
    best_state, best = list(state), current

    for temperature in schedule.temperatures(n_steps):
        flipped = int(rng.integers(cost.n))
        state[flipped] ^= 1
        proposed = counting_cost.evaluate(state)
        delta = proposed - current

        if delta <= 0 or (temperature > 0 and rng.random() < math.exp(-delta / temperature)):
            current = proposed
            if current < best:
                best_state, best = list(state), current
        else:
            state[flipped] ^= 1

    return BaselineReport(
        best_bitstring="".join(str(bit) for bit in best_state),
        best_cost=best,
        evaluations=counting_cost.evaluations,
        method="simulated_annealing",
        seed=seed,
        trial=trial,
    )


def sa_batch(
    cost: CostFunction,
    schedule: AnnealingSchedule,
    n_steps: int,
    trials: int,
    seed: int = 0,
    threads: int = 1,
) -> list[BaselineReport]:
    """Independent annealing runs; run k uses the RNG stream (seed, k). Ordered by k."""
    started_time = time.time()

    def run(trial: int) -> BaselineReport:
        return simulated_annealing(
            cost, schedule, n_steps, trial_rng(seed, trial), seed=seed, trial=trial
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            reports = list(executor.map(run, range(trials)))
    else:
        reports = [run(trial) for trial in range(trials)]

    logger.debug(f"sa_batch duration: {time.time()-started_time}")

    return reports


def _accuracy_of_cost(value: float, c_zero: float, c_inf: float) -> float | None:
    if c_inf - c_zero <= 0:
        return None
    return float(np.clip((c_inf - value) / (c_inf - c_zero), 0.0, 1.0))


def matched_sa_steps(
    cost: CostFunction,
    target_accuracy: float | None,
    params: SAParams,
    trials: int,
    seed: int = 0,
    threads: int = 1,
) -> dict:
    """Doubles the number of annealing steps until the mean best cost of `trials` runs
    reaches `target_accuracy` (same accuracy measure as the quantum heuristic).
    A None target, as for degenerate instances, is reached at once."""
    c_zero, c_inf = ensemble.effective_cost_limits(cost)

    n_steps = 1
    while True:
        schedule = AnnealingSchedule(params.t_start, params.t_end, params.ratio)
        reports = sa_batch(cost, schedule, n_steps, trials, seed, threads)
        mean_best = float(np.mean([report.best_cost for report in reports]))
        accuracy = (
            None if target_accuracy is None else _accuracy_of_cost(mean_best, c_zero, c_inf)
        )

        reached = target_accuracy is None or (
            accuracy is not None and accuracy >= target_accuracy
        )
        if reached or 2 * n_steps > params.max_matched_steps:
            break
        n_steps *= 2

    return {
        "target_accuracy": target_accuracy,
        "n_steps": n_steps,
        "evaluations_per_run": n_steps + 1,
        "sa_accuracy": accuracy,
        "reached": reached,
    }


def compare_loads(
    cost: CostFunction,
    b: int,
    params: SAParams,
    trials: int,
    seed: int = 0,
    threads: int = 1,
    mode: Mode = "closed_form",
) -> dict:
    """Quantum expected repetitions against simulated annealing evaluation counts.

    Returns
    -------
    dict
        Comparison record (empty when `trials` is 0) with the quantum load, the
        fixed-schedule annealing runs, and the annealing load at matched accuracy.
    """
    if trials == 0:
        return {}

    started_time = time.time()

    point = ensemble.thermo_point(cost, 1 / b)
    optimum_set, optimum = brute_force_min(cost)
    tolerance = 1e-12 * cost.spread

    quantum_runs = [
        run
        for run in sample_many(cost, b, trials, mode, seed, threads)
        if "error" not in run
    ]

    reports = sa_batch(cost, params.schedule, params.n_steps, trials, seed, threads)
    best_costs = [report.best_cost for report in reports]
    c_zero, c_inf = ensemble.effective_cost_limits(cost)

    record = {
        "quantum": {
            "b": b,
            "expected_repetitions": ensemble.expected_repetitions(cost, b),
            "p0b": point.p0b,
            "accuracy": point.accuracy,
            "effective_cost": point.c_eff,
            "argmin_mass": argmin_mass(cost, b),
            "mode": mode,
            "successful_runs": len(quantum_runs),
            "optimum_frequency": sum(
                run["cost"] <= optimum + tolerance for run in quantum_runs
            )
            / trials,
        },
        "simulated_annealing": {
            "params": asdict(params),
            "trials": trials,
            "evaluations_per_run": params.n_steps + 1,
            "mean_best_cost": float(np.mean(best_costs)),
            "accuracy": None
            if point.degenerate
            else _accuracy_of_cost(float(np.mean(best_costs)), c_zero, c_inf),
            "optimum_frequency": sum(cost_value <= optimum + tolerance for cost_value in best_costs)
            / trials,
            "runs": [asdict(report) for report in reports],
        },
        "matched_quality": matched_sa_steps(
            cost, point.accuracy, params, trials, seed, threads
        ),
        "optimum": {"cost": optimum, "argmin": optimum_set},
        "note": LOAD_ACCOUNTING_NOTE,
    }

    logger.info(f"compare_loads duration: {time.time()-started_time}")

    return record

"""
Effective thermodynamics of the post-selected output distribution.

With b control qubits, the post-selected search distribution is a Boltzmann
distribution at effective temperature t = 1/b over the energy levels
E(x) = -2 log cos(pi/2 C_nor(x)). Here b is a continuous positive real.
"""
import functools
import logging
import math
import time
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy.special import logsumexp, softmax

from src.optimization.cost import CostFunction, evaluate_all
from src.optimization.exceptions import (
    DegenerateProjectionError,
    InvalidInputError,
    ThermodynamicsError,
)

logger = logging.getLogger(__name__)

ENTROPY_STEP = 1e-4
ENTROPY_RTOL = 1e-6
ENTROPY_ATOL = 1e-9
DEGENERACY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class EnsembleSummary:
    n: int
    c_nor: np.ndarray
    energies: np.ndarray
    z: float
    p0b: float
    distribution: np.ndarray


@dataclass(frozen=True)
class ThermoPoint:
    """Thermodynamic state at effective temperature t = 1/b.

    `s` is the entropy of the free energy normalized by Z(b=0) = N, so it lies in
    [-log N, 0]; `gibbs_entropy = s + log N` is the usual Gibbs entropy.
    `accuracy` is None for degenerate instances where C(inf) = C(0).
    """

    b: float
    t: float
    f: float
    u: float
    s: float
    gibbs_entropy: float
    c_eff: float
    c_eff_nor: float
    delta: float
    accuracy: float | None
    p0b: float
    expected_repetitions: float
    entropy_residual: float
    degenerate: bool


@functools.lru_cache(maxsize=8)
def _levels(cost: CostFunction) -> tuple[np.ndarray, np.ndarray, float]:
    started_time = time.time()

    values = evaluate_all(cost)
    c_nor = (values - cost.c_min) / cost.spread
    energies = -2.0 * np.log(np.cos(np.pi / 2 * c_nor))
    c_nor.setflags(write=False)
    energies.setflags(write=False)

    logger.debug(f"_levels duration: {time.time()-started_time}")

    return c_nor, energies, float(values.min())


def _check_b(b: float, allow_zero: bool = True) -> None:
    if not math.isfinite(b) or b < 0 or (b == 0 and not allow_zero):
        raise InvalidInputError(f"invalid number of control qubits b={b}")


def energies(cost: CostFunction) -> np.ndarray:
    """Effective energy levels E_k = -2 log cos(pi/2 C_nor(x_k)) of all 2**n states."""
    return _levels(cost)[1]


def asymptotic_energy(c_nor: float, branch: Literal["low", "high"]) -> float:
    """Low-cost (C_nor << 1) and high-cost (1 - C_nor << 1) forms of the energy."""
    if not 0 < c_nor < 1:
        raise InvalidInputError(f"normalized cost must be in (0, 1), got {c_nor}")

    match branch:
        case "low":
            return math.pi**2 / 4 * c_nor**2
        case "high":
            return math.log(4 / (math.pi**2 * (1 - c_nor) ** 2))
        case _:
            raise InvalidInputError(f"branch must be 'low' or 'high', got {branch!r}")


def log_partition_function(cost: CostFunction, b: float) -> float:
    _check_b(b)
    return float(logsumexp(-b * energies(cost)))


def partition_function(cost: CostFunction, b: float) -> tuple[float, float]:
    """Returns `(Z, P0_b)`.

    Z is summed over Boltzmann weights exp(-b E_k); P0_b, the probability of the
    all-zero control outcome, is Z / N. Both come from log Z, so P0_b underflows to
    0.0 at very large b instead of raising.
    """
    log_z = log_partition_function(cost, b)

    return math.exp(log_z), math.exp(log_z - cost.n * math.log(2))


def expected_repetitions(cost: CostFunction, b: float) -> float:
    """Mean number of executions of the deterministic part before post-selection succeeds."""
    _check_b(b)
    log_p0b = log_partition_function(cost, b) - cost.n * math.log(2)
    try:
        return math.exp(-log_p0b)
    except OverflowError:
        return math.inf


def boltzmann_distribution(
    cost: CostFunction, b: float, form: Literal["energy", "cosine"] = "energy"
) -> np.ndarray:
    """Post-selected search distribution P_b over all basis indices.

    Parameters
    ----------
    cost: CostFunction
        The cost function.
    b: float
        Number of control qubits (any real >= 0).
    form: str
        "energy" computes exp(-b E)/Z, "cosine" computes cos^2b(pi/2 C_nor)/sum.

    Returns
    -------
    ndarray
        Probabilities indexed by basis index.
    """
    _check_b(b)
    c_nor, levels, _ = _levels(cost)

    match form:
        case "energy":
            return softmax(-b * levels)
        case "cosine":
            weights = np.cos(np.pi / 2 * c_nor) ** (2 * b)
            if not weights.sum() > 0:
                raise DegenerateProjectionError(
                    f"cosine weights underflow at b={b}, use the energy form"
                )
            return weights / weights.sum()
        case _:
            raise InvalidInputError(f"form must be 'energy' or 'cosine', got {form!r}")


def summarize(cost: CostFunction, b: float) -> EnsembleSummary:
    c_nor, levels, _ = _levels(cost)
    z, p0b = partition_function(cost, b)

    return EnsembleSummary(
        n=cost.n,
        c_nor=c_nor,
        energies=levels,
        z=z,
        p0b=p0b,
        distribution=boltzmann_distribution(cost, b),
    )


def _free_energy_at(levels: np.ndarray, b: float) -> float:
    # shifted by the ground level so that differences in b stay well conditioned
    ground = levels.min()
    shifted_log_z = logsumexp(-b * (levels - ground))

    return float(ground - (shifted_log_z - math.log(len(levels))) / b)


def free_energy(cost: CostFunction, b: float) -> float:
    """F(b) = -(1/b) log(Z / Z(b=0)) with Z(b=0) = N, i.e. -(1/b) log P0_b."""
    if b == 0:
        raise ThermodynamicsError("the free energy is undefined at b = 0")
    _check_b(b)

    return _free_energy_at(energies(cost), b)


def _effective_cost_nor(f: float) -> float:
    return 2 / math.pi * math.acos(math.exp(-f / 2))


def effective_cost_limits(cost: CostFunction) -> tuple[float, float]:
    """Returns `(C(t=0), C(t=inf))`.

    C(0) is the true minimum cost; C(inf) follows from the b -> 0 limit of the free
    energy, which is the uniform average of the energy levels.
    """
    _, levels, minimum = _levels(cost)
    c_inf = cost.c_min + cost.spread * _effective_cost_nor(float(np.mean(levels)))

    return minimum, c_inf


def thermo_point(cost: CostFunction, t: float) -> ThermoPoint:
    """Thermodynamic quantities at effective temperature t.

    The entropy is computed as (U - F)/t and cross-checked against -dF/dt by
    central finite difference; a mismatch raises ThermodynamicsError.
    """
    if not (math.isfinite(t) and t > 0):
        raise ThermodynamicsError(f"effective temperature must be positive, got {t}")

    b = 1 / t
    c_nor, levels, _ = _levels(cost)
    log_n = cost.n * math.log(2)

    log_z = float(logsumexp(-b * levels))
    f = _free_energy_at(levels, b)
    u = float(np.dot(softmax(-b * levels), levels))
    s = (u - f) / t

    step = ENTROPY_STEP * t
    f_plus = _free_energy_at(levels, 1 / (t + step))
    f_minus = _free_energy_at(levels, 1 / (t - step))
    s_difference = -(f_plus - f_minus) / (2 * step)
    entropy_residual = abs(s_difference - s)
    if entropy_residual > ENTROPY_RTOL * abs(s) + ENTROPY_ATOL:
        raise ThermodynamicsError(
            f"entropy cross-check failed at t={t}: (U-F)/t={s}, -dF/dt={s_difference}"
        )

    c_eff_nor = _effective_cost_nor(f)
    c_eff = cost.c_min + cost.spread * c_eff_nor
    c_zero, c_inf = effective_cost_limits(cost)
    delta = c_inf - c_eff

    degenerate = float(np.ptp(c_nor)) <= DEGENERACY_TOLERANCE
    accuracy = None if degenerate else float(np.clip(delta / (c_inf - c_zero), 0.0, 1.0))

    p0b = math.exp(log_z - log_n)

    return ThermoPoint(
        b=b,
        t=t,
        f=f,
        u=u,
        s=s,
        gibbs_entropy=s + log_n,
        c_eff=c_eff,
        c_eff_nor=c_eff_nor,
        delta=delta,
        accuracy=accuracy,
        p0b=p0b,
        expected_repetitions=math.inf if p0b == 0 else 1 / p0b,
        entropy_residual=entropy_residual,
        degenerate=degenerate,
    )


def consistency_p0b(cost: CostFunction, b: float) -> float:
    """|P0_b - cos^2b(pi/2 C_nor_eff(b))|, which vanishes identically."""
    _, p0b = partition_function(cost, b)
    c_eff_nor = _effective_cost_nor(free_energy(cost, b))

    return abs(p0b - math.cos(math.pi / 2 * c_eff_nor) ** (2 * b))


def check_monotonicity(points: Sequence[ThermoPoint], tolerance: float = 1e-12) -> list[str]:
    """Sweep diagnostics: accuracy must not decrease with b, F must not increase with b.

    Returns
    -------
    list of str
        Human readable descriptions of the violated diagnostics (empty if none).
    """
    violations = []
    ordered = sorted(points, key=lambda point: point.b)
    for previous, current in zip(ordered, ordered[1:]):
        if current.f > previous.f + tolerance:
            violations.append(f"F increases between b={previous.b} and b={current.b}")
        if (
            previous.accuracy is not None
            and current.accuracy is not None
            and current.accuracy < previous.accuracy - tolerance
        ):
            violations.append(
                f"accuracy decreases between b={previous.b} and b={current.b}"
            )

    return violations


def sweep(cost: CostFunction, b_values: Sequence[float]) -> list[ThermoPoint]:
    """Thermodynamic points for each b of `b_values` (all > 0), in the given order."""
    started_time = time.time()

    for b in b_values:
        if not (math.isfinite(b) and b > 0):
            raise InvalidInputError(f"sweep values of b must be positive, got {b}")

    points = [thermo_point(cost, 1 / b) for b in b_values]
    for violation in check_monotonicity(points):
        logger.warning(violation)

    logger.info(f"sweep duration: {time.time()-started_time}")

    return points

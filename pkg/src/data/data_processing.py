"""
Tabular processing of experiment results
"""
import logging
import math
import time
from typing import Sequence

import numpy as np
import polars as pl

from src.optimization.cost import CostFunction
from src.optimization.ensemble import ThermoPoint
from src.optimization.utils import index_to_bits

logger = logging.getLogger(__name__)

IDENTITY_TOLERANCE = 1e-9

SWEEP_SCHEMA = {
    "b": pl.Float64,
    "t": pl.Float64,
    "F": pl.Float64,
    "U": pl.Float64,
    "S": pl.Float64,
    "C_eff": pl.Float64,
    "C_eff_nor": pl.Float64,
    "Delta": pl.Float64,
    "accuracy": pl.Float64,
    "P0b": pl.Float64,
    "expected_repetitions": pl.Float64,
    "checks": pl.Utf8,
}

SAMPLE_SCHEMA = {
    "b": pl.Int64,
    "mode": pl.Utf8,
    "trial": pl.Int64,
    "seed": pl.Int64,
    "repetitions": pl.Int64,
    "result": pl.Utf8,
    "cost": pl.Float64,
    "error": pl.Utf8,
}


def _point_checks(point: ThermoPoint, previous: ThermoPoint | None) -> str:
    failed = []
    if abs(point.f - (point.u - point.t * point.s)) > IDENTITY_TOLERANCE:
        failed.append("free_energy_identity")
    if previous is not None:
        if point.b > previous.b and point.f > previous.f + 1e-12:
            failed.append("free_energy_increase")
        if (
            point.b > previous.b
            and point.accuracy is not None
            and previous.accuracy is not None
            and point.accuracy < previous.accuracy - 1e-12
        ):
            failed.append("accuracy_decrease")
    if point.degenerate:
        failed.append("degenerate")

    return ";".join(failed) if failed else "ok"


def sweep_frame(points: Sequence[ThermoPoint]) -> pl.DataFrame:
    """
    Tabulates a thermodynamic sweep, one row per point in the given order.

    Parameters
    ----------
    points: sequence of ThermoPoint
        Output of `ensemble.sweep`.

    Returns
    -------
    DataFrame
        Polars DataFrame with the columns of `SWEEP_SCHEMA`. The "checks" column holds
        "ok" or the ";"-separated list of failed per-row diagnostics (F = U - tS identity,
        monotonicity against the previous row, degenerate instance).
    """
    rows = []
    previous = None
    for point in points:
        rows.append(
            {
                "b": point.b,
                "t": point.t,
                "F": point.f,
                "U": point.u,
                "S": point.s,
                "C_eff": point.c_eff,
                "C_eff_nor": point.c_eff_nor,
                "Delta": point.delta,
                "accuracy": point.accuracy,
                "P0b": point.p0b,
                "expected_repetitions": point.expected_repetitions,
                "checks": _point_checks(point, previous),
            }
        )
        previous = point

    return pl.DataFrame(rows, schema=SWEEP_SCHEMA)


def format_floats(df: pl.DataFrame) -> pl.DataFrame:
    """Converts every float column to text with 17 significant digits; nulls stay null."""
    float_columns = [name for name, dtype in df.schema.items() if dtype == pl.Float64]

    return df.with_columns(
        [
            pl.col(name).map_elements(lambda value: f"{value:.17g}", return_dtype=pl.Utf8)
            for name in float_columns
        ]
    )


def csv_text(df: pl.DataFrame) -> str:
    return format_floats(df).write_csv(null_value="")


def samples_frame(records: list[dict]) -> pl.DataFrame:
    """One row per trial; failed trials have an "error" and no result."""
    return pl.from_dicts(records, schema=SAMPLE_SCHEMA)


def result_histogram(samples: pl.DataFrame) -> pl.DataFrame:
    """Counts and empirical frequencies of the measured bitstrings, sorted by bitstring."""
    successful = samples.filter(pl.col("result").is_not_null())

    return (
        successful.group_by("result")
        .agg(pl.len().alias("count"))
        .with_columns((pl.col("count") / successful.height).alias("frequency"))
        .sort("result")
    )


def total_variation(histogram: pl.DataFrame, distribution: np.ndarray, n: int) -> float:
    """Total-variation distance between an empirical histogram and an exact distribution
    indexed by basis index."""
    exact = pl.DataFrame(
        {
            "result": [index_to_bits(index, n) for index in range(len(distribution))],
            "probability": distribution.tolist(),
        }
    )
    joined = exact.join(histogram, on="result", how="left").fill_null(0)

    return 0.5 * float((joined["frequency"] - joined["probability"]).abs().sum())


def sample_summary(
    records: list[dict], cost: CostFunction, distribution: np.ndarray, p0b: float
) -> dict:
    """
    Aggregates per-trial sampling records.

    Parameters
    ----------
    records: list of dicts
        Output of `circuit.sample_many`.
    cost: CostFunction
        The sampled cost function.
    distribution: ndarray
        Exact post-selected distribution the results are drawn from.
    p0b: float
        Exact probability of a successful post-selection.

    Returns
    -------
    dict
        Trial counts, repetition statistics against the geometric law, the empirical
        distribution and its total-variation distance to the exact one.
    """
    started_time = time.time()

    samples = samples_frame(records)
    successful = samples.filter(pl.col("error").is_null())
    histogram = result_histogram(samples)

    trials_ok = successful.height
    mean_repetitions = float(successful["repetitions"].mean()) if trials_ok else None
    # standard deviation of a geometric law with success probability p0b
    repetitions_sigma = math.sqrt(1 - p0b) / p0b if p0b > 0 else math.inf

    summary = {
        "trials": samples.height,
        "failed_trials": samples.height - trials_ok,
        "mean_repetitions": mean_repetitions,
        "expected_repetitions": 1 / p0b if p0b > 0 else math.inf,
        "repetitions_standard_error": repetitions_sigma / math.sqrt(trials_ok)
        if trials_ok
        else None,
        "mean_cost": float(successful["cost"].mean()) if trials_ok else None,
        "tv_distance": total_variation(histogram, distribution, cost.n) if trials_ok else None,
        "empirical_distribution": dict(
            zip(histogram["result"].to_list(), histogram["frequency"].to_list())
        ),
    }

    logger.debug(f"sample_summary duration: {time.time()-started_time}")

    return summary


def load_rows(record: dict) -> pl.DataFrame:
    """Flat table of a load comparison: one row per method with its load and accuracy."""
    quantum = record["quantum"]
    annealing = record["simulated_annealing"]
    matched = record["matched_quality"]

    return pl.DataFrame(
        [
            {
                "method": "quantum",
                "load": quantum["expected_repetitions"],
                "load_unit": "circuit_executions",
                "accuracy": quantum["accuracy"],
            },
            {
                "method": "simulated_annealing",
                "load": float(annealing["evaluations_per_run"]),
                "load_unit": "cost_evaluations",
                "accuracy": annealing["accuracy"],
            },
            {
                "method": "simulated_annealing_matched",
                "load": float(matched["evaluations_per_run"]),
                "load_unit": "cost_evaluations",
                "accuracy": matched["sa_accuracy"],
            },
        ],
        schema={
            "method": pl.Utf8,
            "load": pl.Float64,
            "load_unit": pl.Utf8,
            "accuracy": pl.Float64,
        },
    )

"""
`verify`: gate-level circuit against its closed forms.
"""
import argparse
import logging
from pathlib import Path

import numpy as np

from src.commands.utils import (
    add_common_arguments,
    add_instance_argument,
    base_config,
    load_instance,
    positive_int,
    write_text,
)
from src.data.utils import dumps_record, output_header
from src.optimization import ensemble
from src.optimization.circuit import closed_form_final_state, postselect_zero, run_circuit
from src.optimization.cost import CostFunction
from src.optimization.statevec import (
    GateTables,
    QuantumState,
    apply_diagonal,
    apply_hadamard,
    apply_u_pm,
    apply_unitary_phase,
    basis_state,
    build_phase_tables,
    corrupt_phase_tables,
    dump_amplitudes,
    fidelity,
    load_amplitudes,
    max_deviation,
    search_branch,
    uniform_superposition,
)

logger = logging.getLogger(__name__)

RESIDUAL_THRESHOLD = 1e-10


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser(
        "verify", help="compare the gate-level circuit with the closed-form results"
    )
    add_instance_argument(parser)
    parser.add_argument("--b", type=positive_int, default=1, help="number of control qubits")
    parser.add_argument(
        "--corrupt",
        action="store_true",
        help="perturb one phase table before simulating (negative control)",
    )
    parser.add_argument(
        "--corrupt-delta", type=float, default=0.1, help="extra phase of the perturbed entry"
    )
    parser.add_argument(
        "--dump",
        type=Path,
        default=None,
        help="write the final amplitudes as little-endian complex128 to this file",
    )
    add_common_arguments(parser)
    parser.set_defaults(func=run)


def _hadamard_preparation(n: int) -> float:
    """H on every qubit of |0...0> against the uniform superposition."""
    state = basis_state(n, 0, 0)
    for qubit in range(n):
        state = apply_hadamard(state, qubit)

    return max_deviation(state, uniform_superposition(n))


def _u_pm_branches(cost: CostFunction, tables: GateTables) -> float:
    """One controlled U± on |S> (H|0>): each control branch against U|S> or U^-1|S>."""
    state = apply_hadamard(uniform_superposition(cost.n, 1), cost.n)
    state = apply_u_pm(state, cost.n, cost, tables)

    infidelities = []
    for pattern, sign in ((0, 1), (1, -1)):
        branch = QuantumState(cost.n, 0, search_branch(state, pattern) * np.sqrt(2))
        expected = apply_unitary_phase(uniform_superposition(cost.n), cost, sign)
        infidelities.append(abs(1 - fidelity(branch, expected)))

    return max(infidelities)


def residuals(
    cost: CostFunction,
    b: int,
    corrupt_delta: float | None = None,
    dump_path: Path | None = None,
) -> dict:
    """
    Residuals of the circuit checks.

    Parameters
    ----------
    cost: CostFunction
        Instance to simulate.
    b: int
        Number of control qubits.
    corrupt_delta: float, optional
        If given, the last phase table gets this extra phase on its first entry.
    dump_path: Path, optional
        If given, the final amplitudes are dumped there and read back.

    Returns
    -------
    dict
        "hadamard_preparation": initial superposition built gate by gate,
        "product_decomposition": composed phase gates against the direct phase,
        "u_pm_branches": infidelity of the two branches of one controlled U±,
        "final_state": gate-level against closed-form amplitudes,
        "postselection_probability" and "postselected_distribution": projection
        against P0_b and the Boltzmann distribution,
        "amplitude_dump" (with `dump_path`): reloaded dump against the final state.
    """
    tables = build_phase_tables(cost, 1)
    if corrupt_delta is not None:
        tables = corrupt_phase_tables(tables, -1, corrupt_delta)

    composed = uniform_superposition(cost.n)
    for qubits, table in tables:
        composed = apply_diagonal(composed, qubits, table)
    direct = apply_unitary_phase(uniform_superposition(cost.n), cost, 1)

    final_state = run_circuit(cost, b, tables)
    search_state, probability = postselect_zero(final_state, b)
    _, p0b = ensemble.partition_function(cost, b)

    checks = {
        "hadamard_preparation": _hadamard_preparation(cost.n),
        "product_decomposition": max_deviation(composed, direct),
        "u_pm_branches": _u_pm_branches(cost, tables),
        "final_state": max_deviation(final_state, closed_form_final_state(cost, b)),
        "postselection_probability": abs(probability - p0b),
        "postselected_distribution": float(
            np.max(
                np.abs(
                    np.abs(search_state.amplitudes) ** 2
                    - ensemble.boltzmann_distribution(cost, b)
                )
            )
        ),
    }

    if dump_path is not None:
        dump_amplitudes(final_state, dump_path)
        reloaded = load_amplitudes(dump_path, cost.n, b)
        checks["amplitude_dump"] = max_deviation(reloaded, final_state)
        logger.info(f"final amplitudes dumped to {dump_path}")

    return checks


def run(args: argparse.Namespace) -> int:
    cost, _ = load_instance(args.instance)

    corrupt_delta = args.corrupt_delta if args.corrupt else None
    checks = residuals(cost, args.b, corrupt_delta, args.dump)
    failed = [name for name, value in checks.items() if not value < RESIDUAL_THRESHOLD]
    for name in failed:
        logger.warning(f"check {name} failed: residual {checks[name]}")

    report = output_header(base_config(args), args.seed, not args.no_timestamp)
    report |= {
        "n": cost.n,
        "b": args.b,
        "threshold": RESIDUAL_THRESHOLD,
        "residuals": checks,
        "failed": failed,
        "passed": not failed,
    }
    write_text(dumps_record(report), args.out)

    return 0 if not failed else 1

import math

import numpy as np
import pytest

from src.optimization import ensemble
from src.optimization.cost import (
    CostFunction,
    LocalTerm,
    argmin_indices,
    build_cost,
    evaluate_all,
    graph_partition_cost,
    normalize_all,
    random_graph,
    random_local_cost,
)
from src.optimization.exceptions import (
    DegenerateProjectionError,
    InvalidInputError,
    ThermodynamicsError,
)


@pytest.fixture
def gapped_cost() -> CostFunction:
    """Number of ones over 8 bits: unique minimum, cost gap 1."""
    return build_cost(8, 0.0, [LocalTerm((i,), (0.0, 1.0)) for i in range(8)])


@pytest.fixture
def constant_cost() -> CostFunction:
    return build_cost(3, 2.5, [])


def exact_energy(c_nor: float) -> float:
    return -2 * math.log(math.cos(math.pi / 2 * c_nor))


def test_energy_at_half_normalized_cost():
    cost = CostFunction(
        n=1, constant=0.0, terms=(LocalTerm((0,), (0.0, 1.0)),), c_min=-1.0, c_max=3.0
    )
    np.testing.assert_allclose(
        ensemble.energies(cost), [exact_energy(0.25), math.log(2)], rtol=1e-12
    )


def test_low_cost_asymptotic_energy():
    assert ensemble.asymptotic_energy(0.01, "low") == pytest.approx(2.4674e-4, rel=1e-4)
    assert exact_energy(0.01) == pytest.approx(2.4674e-4, rel=1e-3)


@pytest.mark.parametrize("c_nor", [0.001, 0.01, 0.03, 0.049])
def test_low_cost_branch_accuracy(c_nor):
    exact = exact_energy(c_nor)
    assert abs(ensemble.asymptotic_energy(c_nor, "low") - exact) / exact < 0.01


@pytest.mark.parametrize("distance", [1e-6, 1e-4, 1e-3, 0.0099])
def test_high_cost_branch_accuracy(distance):
    exact = exact_energy(1 - distance)
    assert abs(ensemble.asymptotic_energy(1 - distance, "high") - exact) / exact < 0.01


def test_high_cost_branch_diverges_monotonically():
    values = [ensemble.asymptotic_energy(1 - 10.0**-k, "high") for k in range(1, 8)]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_asymptotic_energy_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        ensemble.asymptotic_energy(1.0, "low")
    with pytest.raises(InvalidInputError):
        ensemble.asymptotic_energy(0.5, "middle")


def test_partition_function_at_zero_b(k4_cost):
    z, p0b = ensemble.partition_function(k4_cost, 0)
    assert z == pytest.approx(16.0)
    assert p0b == pytest.approx(1.0)


def test_partition_function_of_the_two_state_example(two_state_cost):
    z, p0b = ensemble.partition_function(two_state_cost, 1)
    assert p0b == pytest.approx(0.5, abs=1e-12)
    assert z == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("b", [0.5, 1, 3.7, 16])
def test_partition_function_equals_n_times_p0b(b):
    cost = random_local_cost(6, 2, seed=4)
    z, p0b = ensemble.partition_function(cost, b)
    assert z == pytest.approx(64 * p0b, rel=1e-12)
    assert ensemble.expected_repetitions(cost, b) == pytest.approx(1 / p0b, rel=1e-12)


def test_boltzmann_distribution_of_the_two_state_example(two_state_cost):
    np.testing.assert_allclose(
        ensemble.boltzmann_distribution(two_state_cost, 1),
        [0.853553390593, 0.146446609407],
        atol=1e-12,
    )


def test_boltzmann_distribution_at_zero_b_is_uniform(k4_cost):
    np.testing.assert_allclose(ensemble.boltzmann_distribution(k4_cost, 0), np.full(16, 1 / 16))


@pytest.mark.parametrize("b", [0.3, 2, 9.5])
def test_energy_and_cosine_forms_agree(b):
    cost = random_local_cost(5, 3, seed=8)
    energy_form = ensemble.boltzmann_distribution(cost, b, "energy")
    cosine_form = ensemble.boltzmann_distribution(cost, b, "cosine")

    np.testing.assert_allclose(energy_form, cosine_form, rtol=1e-10)
    assert energy_form.sum() == pytest.approx(1.0, abs=1e-12)


def test_summarize(two_state_cost):
    summary = ensemble.summarize(two_state_cost, 1)
    assert summary.z == pytest.approx(summary.p0b * 2)
    np.testing.assert_allclose(summary.c_nor, [0.25, 0.75])


def test_free_energy_is_undefined_at_zero_b(k4_cost):
    with pytest.raises(ThermodynamicsError):
        ensemble.free_energy(k4_cost, 0)


def test_free_energy_at_large_b(gapped_cost):
    levels = ensemble.energies(gapped_cost)
    b = 1e4
    # a single ground level out of 256: F = E_min + log(256) / b up to exp(-b gap)
    assert ensemble.free_energy(gapped_cost, b) == pytest.approx(
        levels.min() + math.log(256) / b, abs=1e-12
    )


def test_free_energy_at_small_b_tends_to_mean_energy(gapped_cost):
    levels = ensemble.energies(gapped_cost)
    b = 1e-3
    f = ensemble.free_energy(gapped_cost, b)
    assert levels.mean() - b * levels.var() <= f <= levels.mean() + 1e-12


def test_thermodynamic_identity_and_entropy_bounds():
    cost = random_local_cost(8, 3, seed=21)
    for t in (0.01, 0.1, 1.0, 10.0, 100.0):
        point = ensemble.thermo_point(cost, t)
        assert abs(point.f - (point.u - t * point.s)) < 1e-9
        assert -8 * math.log(2) - 1e-9 <= point.s <= 1e-9
        assert -1e-9 <= point.gibbs_entropy <= 8 * math.log(2) + 1e-9
        assert point.entropy_residual <= 1e-6 * abs(point.s) + 1e-9


def test_gibbs_entropy_tends_to_log_n(gapped_cost):
    point = ensemble.thermo_point(gapped_cost, 1e3)
    assert point.gibbs_entropy == pytest.approx(8 * math.log(2), abs=1e-5)


def test_constant_cost_is_flagged_degenerate(constant_cost):
    point = ensemble.thermo_point(constant_cost, 1.0)
    assert abs(point.s) < 1e-9
    assert point.degenerate
    assert point.accuracy is None


def test_thermo_point_rejects_non_positive_temperature(k4_cost):
    with pytest.raises(ThermodynamicsError):
        ensemble.thermo_point(k4_cost, 0.0)
    with pytest.raises(ThermodynamicsError):
        ensemble.thermo_point(k4_cost, -1.0)


def test_effective_cost_limits(gapped_cost):
    c_zero, c_inf = ensemble.effective_cost_limits(gapped_cost)
    levels = ensemble.energies(gapped_cost)

    assert c_zero == evaluate_all(gapped_cost).min()
    expected = gapped_cost.c_min + gapped_cost.spread * 2 / math.pi * math.acos(
        math.exp(-levels.mean() / 2)
    )
    assert c_inf == pytest.approx(expected, abs=1e-9)


def test_effective_cost_tends_to_the_minimum(gapped_cost):
    point = ensemble.thermo_point(gapped_cost, 1e-12)
    assert abs(point.c_eff - 0.0) < 1e-6
    assert point.accuracy == pytest.approx(1.0, abs=1e-6)


def test_effective_cost_converges_like_one_over_b(gapped_cost):
    levels = ensemble.energies(gapped_cost)
    b = 1e4
    point = ensemble.thermo_point(gapped_cost, 1 / b)
    predicted_f = levels.min() + math.log(256) / b
    predicted = gapped_cost.c_min + gapped_cost.spread * 2 / math.pi * math.acos(
        math.exp(-predicted_f / 2)
    )
    assert point.c_eff == pytest.approx(predicted, abs=1e-9)


def test_accuracy_endpoints(gapped_cost):
    assert ensemble.thermo_point(gapped_cost, 1e4).accuracy < 1e-3
    assert ensemble.thermo_point(gapped_cost, 1e-12).accuracy > 1 - 1e-6


def test_consistency_of_the_two_state_example(two_state_cost):
    assert ensemble.consistency_p0b(two_state_cost, 1) < 1e-12


@pytest.mark.parametrize("b", [1, 2, 4, 8])
def test_consistency_on_random_costs(b):
    for seed in range(5):
        assert ensemble.consistency_p0b(random_local_cost(8, 2, seed=seed), b) < 1e-10


def test_consistency_of_constant_cost(constant_cost):
    assert ensemble.consistency_p0b(constant_cost, 3) < 1e-14


def test_sweep_is_monotone():
    cost = random_local_cost(8, 2, seed=13)
    points = ensemble.sweep(cost, [1, 2, 4, 8, 16, 32])

    accuracies = [point.accuracy for point in points]
    free_energies = [point.f for point in points]
    assert all(a <= b + 1e-12 for a, b in zip(accuracies, accuracies[1:]))
    assert all(a >= b - 1e-12 for a, b in zip(free_energies, free_energies[1:]))
    assert ensemble.check_monotonicity(points) == []


def test_sweep_rejects_non_positive_b(k4_cost):
    with pytest.raises(InvalidInputError):
        ensemble.sweep(k4_cost, [1, 0])


def test_accuracy_and_load_barely_depend_on_the_size():
    # graph family at fixed edge density, b = 1
    points = [
        ensemble.thermo_point(graph_partition_cost(random_graph(v, 0.5, seed=1)), 1.0)
        for v in (8, 12, 16)
    ]
    accuracies = [point.accuracy for point in points]
    loads = [point.expected_repetitions for point in points]

    assert max(accuracies) - min(accuracies) < 0.1
    assert max(loads) / min(loads) < 1.2


def test_large_b_underflows_to_zero_instead_of_raising(two_state_cost):
    # P0 is about exp(-790) / 2, below the smallest double
    _, p0b = ensemble.partition_function(two_state_cost, 5000)
    assert p0b == 0.0
    assert ensemble.expected_repetitions(two_state_cost, 5000) == math.inf

    distribution = ensemble.boltzmann_distribution(two_state_cost, 5000)
    assert distribution[0] == pytest.approx(1.0)
    with pytest.raises(DegenerateProjectionError):
        ensemble.boltzmann_distribution(two_state_cost, 5000, "cosine")


@pytest.mark.parametrize("b", [0.5, 1, 4, 32, 256])
def test_most_likely_state_is_a_cost_minimum(b):
    for seed in range(10):
        cost = random_local_cost(6, 2, seed=seed)
        distribution = ensemble.boltzmann_distribution(cost, b)
        minima, _ = argmin_indices(cost)

        assert distribution[minima].max() == distribution.max()
        assert int(np.argmax(distribution)) in minima


@pytest.mark.parametrize("b", [0.5, 3, 40])
def test_probability_does_not_increase_with_the_cost(b):
    for seed in range(10):
        cost = random_local_cost(6, 3, seed=seed)
        order = np.argsort(normalize_all(cost), kind="stable")
        ordered = ensemble.boltzmann_distribution(cost, b)[order]

        assert np.all(np.diff(ordered) <= 1e-12 * ordered[:-1])

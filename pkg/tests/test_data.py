from itertools import combinations

import numpy as np
import pytest

from acband.common.errors import DimensionMismatch, InfeasibleAlpha, InvalidParameter, MalformedFile
from acband.common.rng import SeededRng
from acband.data import (
    epsilon_best_set,
    generate_exponential_scenario,
    generate_lognormal_matrix,
    group_limits,
    load_scenario,
    parse_matrix_csv,
    save_scenario,
    scenario_from_rates,
    sidecar_path,
)
from acband.oracle.matrix import evaluate_group


def brute_force_best(scenario, k):
    """Configurations within epsilon of the leader in every group of size 2..k they join."""
    ids = range(scenario.n_configs)
    best = set()
    for cid in ids:
        others = [c for c in ids if c != cid]
        ok = True
        for size in range(1, min(k, scenario.n_configs)):
            for rest in combinations(others, size):
                limits = group_limits(scenario, (cid, *rest))
                if limits[cid] < max(limits.values()) - scenario.epsilon - 1e-12:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            best.add(cid)
    return best


def test_generator_hits_target_alpha():
    scenario = generate_exponential_scenario(10, 50, 0.2, 0.1, seed=3)
    assert len(epsilon_best_set(scenario)) == 2
    assert scenario.alpha_realized == 0.2
    assert scenario.matrix.values.shape == (10, 50)


@pytest.mark.parametrize("n, alpha, epsilon", [(200, 0.2, 0.2), (50, 0.05, 0.05), (30, 1.0, 0.3), (7, 0.5, 0.01)])
def test_generator_target_grid(n, alpha, epsilon):
    scenario = generate_exponential_scenario(n, 5, alpha, epsilon, seed=n)
    assert len(epsilon_best_set(scenario)) == int(np.ceil(alpha * n - 1e-9))


def test_known_rates():
    scenario = scenario_from_rates([10, 9.9, 1], 20, epsilon=0.1)
    assert epsilon_best_set(scenario) == {0, 1}
    assert scenario.alpha_realized == pytest.approx(2 / 3)
    assert scenario.limit(0, [0, 2]) == pytest.approx(10 / 11)


def test_zero_epsilon_keeps_the_argmax():
    scenario = scenario_from_rates([1.0, 3.0, 2.0], 5, epsilon=0.0)
    assert epsilon_best_set(scenario) == {1}


def test_every_configuration_is_best_when_rates_are_equal():
    scenario = scenario_from_rates([2.0] * 5, 5, epsilon=0.01)
    assert epsilon_best_set(scenario) == set(range(5))


def test_closed_form_matches_every_group():
    draw = SeededRng(8).generator
    for trial in range(100):
        n = int(draw.integers(2, 9))
        k = int(draw.integers(2, 5))
        rates = draw.uniform(0.05, 2.0, n)
        scenario = scenario_from_rates(rates, 2, epsilon=float(draw.uniform(0.0, 0.5)), seed=trial)
        assert epsilon_best_set(scenario) == brute_force_best(scenario, k)


def test_limits_form_a_distribution():
    scenario = scenario_from_rates([0.5, 1.5, 2.0, 4.0], 2, epsilon=0.1)
    limits = group_limits(scenario, [0, 2, 3])
    assert sum(limits.values()) == pytest.approx(1.0)
    assert limits[3] == pytest.approx(4.0 / 6.5)


def test_pairwise_win_frequency_converges():
    draw = SeededRng(21).generator
    scenario = generate_exponential_scenario(40, 10_000, 0.2, 0.1, seed=21)
    tie_rng = SeededRng(0)
    for _ in range(20):
        a, b = (int(c) for c in draw.choice(40, 2, replace=False))
        wins = sum(evaluate_group(scenario.matrix, [a, b], i, tie_rng).winner == a for i in range(10_000))
        assert abs(wins / 10_000 - scenario.limit(a, [a, b])) < 0.03


def test_infeasible_targets():
    with pytest.raises(InfeasibleAlpha):
        generate_exponential_scenario(10, 5, 0.5, 0.0)
    with pytest.raises(InfeasibleAlpha):
        generate_exponential_scenario(10, 5, 0.5, 1.5)
    with pytest.raises(InfeasibleAlpha):
        generate_exponential_scenario(10, 5, 0.0, 0.1)
    assert len(epsilon_best_set(generate_exponential_scenario(10, 5, 1.0, 1.5))) == 10
    with pytest.raises(InvalidParameter):
        generate_exponential_scenario(1, 5, 0.5, 0.1)


def test_runtimes_are_truncated_at_timeout():
    scenario = scenario_from_rates([1e-4, 1.0], 200, epsilon=0.1, timeout=30.0)
    assert scenario.matrix.values.max() <= 30.0
    assert (scenario.matrix.values[0] == 30.0).mean() > 0.9


def test_lognormal_matrix():
    first = generate_lognormal_matrix(20, 300, sigma=1.0, timeout=100.0, seed=5)
    second = generate_lognormal_matrix(20, 300, sigma=1.0, timeout=100.0, seed=5)
    np.testing.assert_array_equal(first.values, second.values)
    assert first.values.shape == (20, 300)
    assert first.values.min() > 0
    assert first.values.max() <= 100.0


# ==============================================================================
# FILES
# ==============================================================================

@pytest.mark.parametrize("format", ["csv", "binary"])
def test_scenario_files(tmp_path, format):
    scenario = generate_exponential_scenario(6, 8, 0.5, 0.2, seed=2)
    matrix_path, sidecar = save_scenario(scenario, tmp_path / "out", format=format)
    assert sidecar == sidecar_path(matrix_path)
    loaded = load_scenario(matrix_path, format)
    assert loaded.rates == scenario.rates
    assert loaded.epsilon == 0.2
    assert epsilon_best_set(loaded) == epsilon_best_set(scenario)
    np.testing.assert_allclose(loaded.matrix.values, scenario.matrix.values, rtol=1e-6)
    if format == "csv":
        assert parse_matrix_csv(matrix_path).n_configs == 6


def test_broken_sidecar(tmp_path):
    scenario = generate_exponential_scenario(6, 8, 0.5, 0.2, seed=2)
    matrix_path, sidecar = save_scenario(scenario, tmp_path)
    sidecar.write_text("{not json", encoding="utf-8")
    with pytest.raises(MalformedFile):
        load_scenario(matrix_path)
    sidecar.write_text('{"lambdas": [1.0, 2.0]}', encoding="utf-8")
    with pytest.raises(DimensionMismatch):
        load_scenario(matrix_path)

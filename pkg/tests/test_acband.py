import math
from itertools import product

import pytest

from acband.common.errors import InsufficientBudget, InvalidN0, InvalidParameter, PoolExhausted
from acband.common.models import ACBandParams, StatisticKind
from acband.common.rng import SeededRng
from acband.configurators.acband import (
    budget_divisors,
    epoch_constants,
    epoch_schedule,
    n_alpha_delta,
    run_acband,
)
from acband.data import generate_exponential_scenario
from acband.oracle import MatrixOracle, RunTrace


@pytest.mark.parametrize("alpha, delta, expected", [(0.05, 0.05, 59), (0.2, 0.1, 11), (0.1, 0.1, 22), (0.5, 0.5, 1)])
def test_sample_size(alpha, delta, expected):
    assert n_alpha_delta(alpha, delta) == expected


def test_sample_size_rejects_out_of_range():
    with pytest.raises(InvalidParameter):
        n_alpha_delta(0.0, 0.1)
    with pytest.raises(InvalidParameter):
        n_alpha_delta(0.1, 1.0)


def test_default_constants():
    const = epoch_constants(2, 0.05, 0.05)
    assert (const.N, const.n0, const.E) == (59, 118, 1)
    assert const.q == 2.0
    assert const.C1 == pytest.approx(1.0)
    assert const.C2 == pytest.approx(1.0 + math.log2(126))
    assert const.C3 == 1.0
    assert budget_divisors(const) == [pytest.approx(1.0)]


def test_n0_bounds():
    with pytest.raises(InvalidN0):
        epoch_constants(2, 0.05, 0.05, n0=59)
    with pytest.raises(InvalidN0):
        epoch_constants(2, 0.05, 0.05, n0=119)
    assert epoch_constants(2, 0.05, 0.05, n0=60).E == 6
    assert epoch_constants(2, 0.05, 0.05, sample_size=10).n0 == 11


def test_two_epoch_split():
    const = epoch_constants(2, 0.05, 0.05, n0=80)
    assert const.E == 2
    c1, c2 = budget_divisors(const)
    assert 1.0 < c1 < c2
    assert 1.0 / c1 + 1.0 / c2 == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize(
    "alpha, delta, k",
    list(product([0.01, 0.02, 0.05, 0.1], [0.01, 0.05, 0.1], [2, 4, 8, 16])),
)
def test_budget_fractions_sum_to_one(alpha, delta, k):
    n = n_alpha_delta(alpha, delta)
    for n0 in {n + 1, max(n + 1, math.floor(1.5 * n)), 2 * n}:
        divisors = budget_divisors(epoch_constants(k, alpha, delta, n0))
        assert abs(math.fsum(1.0 / c for c in divisors) - 1.0) < 1e-9
        assert all(c > 0 for c in divisors)


def test_epoch_schedule_samples_sixty_configurations():
    schedule = epoch_schedule(ACBandParams(k=2, alpha=0.05, delta=0.05, budget=1000))
    assert schedule.total_sampled == 60
    (plan,) = schedule.epochs
    assert (plan.n, plan.rho, plan.budget) == (60, 1.0, 1000)


@pytest.mark.parametrize("k", [2, 3, 5])
def test_epoch_budgets_never_exceed_total(k):
    n = n_alpha_delta(0.05, 0.05)
    schedule = epoch_schedule(ACBandParams(k=k, alpha=0.05, delta=0.05, n0=n + 1, budget=1_000_000))
    budgets = [p.budget for p in schedule.epochs]
    assert len(budgets) == schedule.E == 6
    assert 1_000_000 - schedule.E <= sum(budgets) <= 1_000_000
    sizes = [p.n for p in schedule.epochs]
    assert sizes == sorted(sizes, reverse=True)
    rhos = [p.rho for p in schedule.epochs]
    assert rhos[0] == pytest.approx(math.log2(k))
    assert rhos == sorted(rhos, reverse=True)


def test_epoch_schedule_needs_a_budget():
    with pytest.raises(InvalidParameter):
        epoch_schedule(ACBandParams())
    with pytest.raises(InsufficientBudget):
        epoch_schedule(ACBandParams(budget=50))


# ==============================================================================
# RUNS
# ==============================================================================

@pytest.fixture(scope="module")
def scenario():
    return generate_exponential_scenario(100, 2000, 0.2, 0.1, seed=4)


def fresh_oracle(scenario, seed, k=2):
    return MatrixOracle(scenario.matrix, SeededRng(seed).fork("oracle"), k=k, trace=RunTrace())


def test_run_is_deterministic(scenario):
    params = ACBandParams(k=2, alpha=0.1, delta=0.1, budget=1500, seed=8)
    first = run_acband(params, fresh_oracle(scenario, 8))
    second = run_acband(params, fresh_oracle(scenario, 8))
    assert first.model_dump() == second.model_dump()
    assert first.method == "acband"
    assert first.seed == 8
    assert first.total_sampled == 23


def test_run_accounting(scenario):
    params = ACBandParams(k=3, alpha=0.1, delta=0.1, n0=30, budget=1800, seed=2)
    oracle = fresh_oracle(scenario, 2, k=3)
    result = run_acband(params, oracle, StatisticKind.NEG_MEAN_RUNTIME)
    assert len(result.epochs) == result.schedule["E"] == 2
    assert result.epochs[1].incumbent == result.epochs[0].winner
    assert result.winner == result.epochs[-1].winner
    assert len(oracle.consumed) == sum(e.instances_used for e in result.epochs) <= 1800
    assert len(set(result.sampled)) == len(result.sampled)
    charges = math.fsum(e["cpu_charge"] for e in oracle.trace.events("group"))
    assert result.cpu_seconds == oracle.ledger.total_seconds == charges
    assert result.wall_clock == pytest.approx(result.cpu_seconds / 3)
    assert sum(e.cpu_seconds for e in result.epochs) == pytest.approx(result.cpu_seconds)


def test_pool_exhaustion(scenario, make_matrix):
    with pytest.raises(PoolExhausted):
        run_acband(ACBandParams(alpha=0.1, delta=0.1, budget=5000), fresh_oracle(scenario, 0))
    small = make_matrix([[1.0] * 500] * 10, timeout=10.0)
    with pytest.raises(PoolExhausted):
        run_acband(ACBandParams(alpha=0.1, delta=0.1, budget=500), MatrixOracle(small, SeededRng(0)))

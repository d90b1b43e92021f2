"""
AC-Band epoch controller.

Each epoch draws fresh configurations, adds the previous winner and runs CSE
on a fresh slice of instances. Early epochs sample many configurations and
eliminate aggressively; later epochs sample fewer and eliminate gently.
"""

from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING, NamedTuple, Optional

from acband.common.errors import InvalidN0, InvalidParameter, PoolExhausted
from acband.common.models import (
    ACBandParams,
    EpochPlan,
    EpochRecord,
    EpochSchedule,
    RunResult,
    StatisticKind,
)
from acband.common.rng import SeededRng
from acband.configurators.cse import cse_schedule, run_cse

if TYPE_CHECKING:
    from acband.oracle import CostOracle

logger = logging.getLogger(__name__)


def n_alpha_delta(alpha: float, delta: float) -> int:
    """Sample size holding an alpha-share configuration with probability 1 - delta.

    >>> n_alpha_delta(0.05, 0.05)
    59
    """
    if not (0.0 < alpha < 1.0 and 0.0 < delta < 1.0):
        raise InvalidParameter(f"alpha and delta must lie in (0, 1), got alpha={alpha}, delta={delta}")
    return max(1, math.ceil(math.log(delta) / math.log1p(-alpha) - 1e-9))


def _epoch_count(n0: int, n: int) -> int:
    # smallest E with 2^E (n0 - N) >= n0, in integers
    epochs = 0
    while (n0 - n) << epochs < n0:
        epochs += 1
    return epochs


class EpochConstants(NamedTuple):
    N: int
    n0: int
    E: int
    q: float
    C1: float
    C2: float
    C3: float

    @property
    def head(self) -> float:
        """C1 E - (2^E - 1)(2 C1 - C2 - C3)."""
        return self.C1 * self.E - (2**self.E - 1) * (2 * self.C1 - self.C2 - self.C3)


def epoch_constants(
    k: int,
    alpha: float,
    delta: float,
    n0: Optional[int] = None,
    sample_size: Optional[int] = None,
) -> EpochConstants:
    """Sample size, epoch count and the constants of the budget split.

    Raises:
        InvalidN0: n0 outside (N, 2N]
    """
    if k < 2:
        raise InvalidParameter(f"k must be >= 2, got {k}")
    n = sample_size if sample_size is not None else n_alpha_delta(alpha, delta)
    if n0 is None:
        n0 = n + 1 if sample_size is not None else 2 * n
    if not n < n0 <= 2 * n:
        raise InvalidN0(f"n0 must lie in (N, 2N] = ({n}, {2 * n}] with N={n}, got n0={n0}")

    epochs = _epoch_count(n0, n)
    q = 1.0 + (k - 1) / epochs
    c1 = math.log(2) / math.log(q)
    c2 = 1.0 + math.log(n0 + 4 * n0 / (n0 - n)) / math.log(q)
    c3 = float(math.ceil(math.log(k) / math.log(q) - 1e-9))
    return EpochConstants(N=n, n0=n0, E=epochs, q=q, C1=c1, C2=c2, C3=c3)


def budget_divisors(constants: EpochConstants) -> list[float]:
    """c_e for e = 1..E; their reciprocals sum to 1."""
    c1, c2, c3, epochs = constants.C1, constants.C2, constants.C3, constants.E
    return [constants.head * 2**e / (2**epochs * (-e * c1 + c2 + c3)) for e in range(1, epochs + 1)]


def epoch_schedule(params: ACBandParams, budget: Optional[int] = None) -> EpochSchedule:
    """Epoch count, per-epoch sizes and budget split for an AC-Band run.

    Args:
        params: run parameters; ``params.budget`` wins over ``budget``
        budget: total instance budget when ``params.budget`` is unset

    Raises:
        InvalidN0: n0 outside (N, 2N]
        InsufficientBudget: some epoch cannot run its CSE schedule
    """
    total = params.budget if params.budget is not None else budget
    if total is None:
        raise InvalidParameter("epoch_schedule needs an instance budget")
    k = params.k
    const = epoch_constants(k, params.alpha, params.delta, params.n0, params.sample_size)

    plans = [
        EpochPlan(
            epoch=e,
            n=math.ceil(const.n0 / 2**e) + 1,
            rho=math.log2((e + k - 1) / e),
            c=c,
            budget=math.floor(total / c + 1e-9),
        )
        for e, c in enumerate(budget_divisors(const), start=1)
    ]
    overshoot = sum(p.budget for p in plans) - total
    if overshoot > 0:
        plans[-1].budget -= overshoot

    for plan in plans:
        cse_schedule(plan.rho, k, plan.n, plan.budget)

    return EpochSchedule(
        N_alpha_delta=const.N,
        n0=const.n0,
        E=const.E,
        q=const.q,
        C1=const.C1,
        C2=const.C2,
        C3=const.C3,
        epochs=plans,
    )


def run_acband(
    params: ACBandParams,
    oracle: CostOracle,
    kind: StatisticKind = StatisticKind.WIN_FREQUENCY,
    rng: Optional[SeededRng] = None,
) -> RunResult:
    """Run every epoch and return the final incumbent.

    ``oracle`` must be fresh for this run: its ledger and consumed-instance
    set are the run's own.

    Raises:
        InsufficientBudget: the schedule cannot be met
        PoolExhausted: not enough configurations or instances
    """
    rng = rng if rng is not None else SeededRng(params.seed)
    budget = params.budget if params.budget is not None else oracle.n_instances
    if budget > oracle.n_instances:
        raise PoolExhausted(f"budget {budget} exceeds the {oracle.n_instances} available instances")
    schedule = epoch_schedule(params, budget)
    if schedule.total_sampled > oracle.n_configs:
        raise PoolExhausted(
            f"schedule samples {schedule.total_sampled} configurations, only {oracle.n_configs} available"
        )
    logger.info(
        "AC-Band: N=%d E=%d sampling %d configurations over %d instances",
        schedule.N_alpha_delta, schedule.E, schedule.total_sampled, budget,
    )

    configs = rng.fork("configs").permutation(oracle.n_configs)[:schedule.total_sampled]
    instances = rng.fork("instances").permutation(oracle.n_instances)[:budget]

    incumbent = configs[0]
    sampled = [incumbent]
    records = []
    next_config, next_instance = 1, 0
    for plan in schedule.epochs:
        fresh = configs[next_config:next_config + plan.n - 1]
        next_config += plan.n - 1
        slice_ = instances[next_instance:next_instance + plan.budget]
        next_instance += plan.budget
        sampled.extend(fresh)

        winner = run_cse(
            [incumbent, *fresh],
            params.k,
            plan.budget,
            plan.rho,
            slice_,
            oracle,
            kind,
            rng.fork(f"cse/e{plan.epoch}"),
            epoch=plan.epoch,
        )
        used = cse_schedule(plan.rho, params.k, plan.n, plan.budget).instances_needed
        record = EpochRecord(
            epoch=plan.epoch,
            incumbent=incumbent,
            sampled=fresh,
            winner=winner,
            instances_used=used,
            budget=plan.budget,
            rho=plan.rho,
            cpu_seconds=oracle.ledger.by_epoch().get(plan.epoch, 0.0),
        )
        records.append(record)
        if oracle.trace is not None:
            oracle.trace.emit("epoch", **record.model_dump())
        logger.info("Epoch %d/%d: winner %d", plan.epoch, schedule.E, winner)
        incumbent = winner

    cpu = oracle.ledger.total_seconds
    return RunResult(
        method="acband",
        seed=params.seed,
        winner=incumbent,
        cpu_seconds=cpu,
        wall_clock=cpu / params.k,
        sampled=sampled,
        ledger=oracle.ledger.breakdown("epoch"),
        epochs=records,
        schedule=schedule.model_dump(),
    )

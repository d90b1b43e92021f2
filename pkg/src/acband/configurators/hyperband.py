"""
Hyperband adapted to algorithm configuration.

Budget is counted in (configuration, instance) evaluations. Configurations
run one at a time without capping, the loss is the mean runtime over every
instance a configuration has seen, and a promotion to r_i instances only
evaluates the instances that configuration has not seen yet.
"""

from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING, Optional

from pydantic import BaseModel, Field

from acband.common.errors import BudgetTooSmall, InvalidParameter, PoolExhausted
from acband.common.helper_functions import rank_with_ties
from acband.common.models import BracketRecord, HyperbandParams, RunResult
from acband.common.rng import SeededRng

if TYPE_CHECKING:
    from acband.oracle import CostOracle

logger = logging.getLogger(__name__)


class Rung(BaseModel):
    n: int = Field(..., ge=1, description="Configurations evaluated in this rung")
    r: int = Field(..., ge=1, description="Instances per configuration after this rung")


class Bracket(BaseModel):
    s: int = Field(..., ge=0)
    rungs: list[Rung]

    @property
    def evaluations(self) -> int:
        previous, total = 0, 0
        for rung in self.rungs:
            total += rung.n * (rung.r - previous)
            previous = rung.r
        return total


class BracketPlan(BaseModel):
    eta: int
    n_max: int
    s_max: int
    R: int = Field(..., ge=1, description="Instances per configuration in the last rung of every bracket")
    brackets: list[Bracket]

    @property
    def evaluations(self) -> int:
        return sum(b.evaluations for b in self.brackets)

    @property
    def total_sampled(self) -> int:
        return sum(b.rungs[0].n for b in self.brackets)


def s_max_for(eta: int, n_max: int) -> int:
    """ceil(log_eta(n_max)), computed in integers."""
    s, power = 0, 1
    while power < n_max:
        power *= eta
        s += 1
    return s


def _brackets(eta: int, n_max: int, s_max: int, r_top: int) -> list[Bracket]:
    brackets = []
    for s in range(s_max, -1, -1):
        n = min(n_max, -(-(s_max + 1) * eta**s // (s + 1)))
        rungs = [
            Rung(n=max(1, n // eta**i), r=max(1, r_top * eta**i // eta**s))
            for i in range(s + 1)
        ]
        brackets.append(Bracket(s=s, rungs=rungs))
    return brackets


def hb_plan(params: HyperbandParams, budget: Optional[int] = None) -> BracketPlan:
    """Bracket geometry with the largest R whose evaluations fit the budget.

    Raises:
        BudgetTooSmall: even R = 1 needs more evaluations than the budget
    """
    total = params.budget if params.budget is not None else budget
    if total is None:
        raise InvalidParameter("hb_plan needs an evaluation budget")
    s_max = s_max_for(params.eta, params.n_max)

    def cost(r_top: int) -> int:
        return sum(b.evaluations for b in _brackets(params.eta, params.n_max, s_max, r_top))

    if cost(1) > total:
        raise BudgetTooSmall(
            f"Hyperband with eta={params.eta}, n_max={params.n_max} needs at least {cost(1)} evaluations, got {total}"
        )
    low, high = 1, total
    while low < high:
        mid = (low + high + 1) // 2
        if cost(mid) <= total:
            low = mid
        else:
            high = mid - 1
    return BracketPlan(
        eta=params.eta,
        n_max=params.n_max,
        s_max=s_max,
        R=low,
        brackets=_brackets(params.eta, params.n_max, s_max, low),
    )


def run_hyperband(params: HyperbandParams, oracle: CostOracle, rng: Optional[SeededRng] = None) -> RunResult:
    """Run every bracket and return the configuration with the lowest mean runtime.

    Raises:
        BudgetTooSmall: from ``hb_plan``
        PoolExhausted: the plan samples more configurations than the oracle has
    """
    rng = rng if rng is not None else SeededRng(params.seed)
    plan = hb_plan(params, oracle.n_instances)
    if plan.total_sampled > oracle.n_configs:
        raise PoolExhausted(
            f"Hyperband plan samples {plan.total_sampled} configurations, only {oracle.n_configs} available"
        )
    logger.info(
        "Hyperband: s_max=%d R=%d sampling %d configurations, %d evaluations",
        plan.s_max, plan.R, plan.total_sampled, plan.evaluations,
    )

    configs = rng.fork("configs").permutation(oracle.n_configs)[:plan.total_sampled]
    runtime_sum: dict[int, float] = {}
    seen: dict[int, int] = {}
    records = []
    cursor = 0

    def loss(cid: int) -> float:
        return runtime_sum[cid] / seen[cid]

    for bracket in plan.brackets:
        s = bracket.s
        order = rng.fork(f"instances/s{s}").permutation(oracle.n_instances)
        active = configs[cursor:cursor + bracket.rungs[0].n]
        cursor += bracket.rungs[0].n
        sampled = list(active)
        reused = False

        for i, rung in enumerate(bracket.rungs):
            for cid in active:
                start = seen.get(cid, 0)
                for position in range(start, rung.r):
                    if position >= oracle.n_instances:
                        reused = True
                    runtime = oracle.evaluate_single(cid, order[position % oracle.n_instances], bracket=s)
                    runtime_sum[cid] = runtime_sum.get(cid, 0.0) + runtime
                    seen[cid] = position + 1
            if oracle.trace is not None:
                oracle.trace.emit(
                    "rung", bracket=s, rung=i, n=rung.n, r=rung.r,
                    losses={str(c): loss(c) for c in active},
                )
            if i + 1 < len(bracket.rungs):
                ranked = rank_with_ties([(c, -loss(c)) for c in active], rng.fork(f"rank/s{s}/i{i}"))
                active = ranked[:bracket.rungs[i + 1].n]

        if reused:
            logger.warning("Bracket s=%d reused instances: the matrix has only %d", s, oracle.n_instances)
        best = rank_with_ties([(c, -loss(c)) for c in sampled], rng.fork(f"best/s{s}"))[0]
        records.append(
            BracketRecord(
                bracket=s,
                rungs=[(r.n, r.r) for r in bracket.rungs],
                sampled=sampled,
                best=best,
                best_loss=loss(best),
                reused_instances=reused,
            )
        )

    winner = rank_with_ties([(c, -loss(c)) for c in seen], rng.fork("winner"))[0]
    cpu = oracle.ledger.total_seconds
    schedule = plan.model_dump()
    schedule["evaluations"] = plan.evaluations
    return RunResult(
        method="hyperband",
        seed=params.seed,
        winner=winner,
        cpu_seconds=cpu,
        wall_clock=cpu,
        sampled=list(configs),
        ledger=oracle.ledger.breakdown("bracket"),
        brackets=records,
        schedule=schedule,
    )

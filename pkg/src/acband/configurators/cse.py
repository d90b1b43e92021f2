"""
Combinatorial successive elimination.

Configurations are partitioned into groups of at most k; every group is run
in parallel on its own slice of instances and only the best-ranked
``f_rho(|group|)`` members advance. Phase 1 runs while at least k
configurations remain, phase 2 races the remaining handful as one group until
a single survivor is left.
"""

from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING, Callable, Optional, Sequence

from pydantic import BaseModel, Field

from acband.common.errors import InsufficientBudget, InvalidParameter, RhoOutOfRange
from acband.common.helper_functions import rank_with_ties
from acband.common.models import CseSchedule, EliminationPlan, StatisticKind
from acband.common.rng import SeededRng
from acband.statistics import StatisticState, stat_score, stat_update

if TYPE_CHECKING:
    from acband.oracle import CostOracle

logger = logging.getLogger(__name__)

# Named aggressiveness levels
RHO_PRESETS: dict[str, Callable[[int], float]] = {
    "halving": lambda k: 1.0,
    "winner_stays": lambda k: math.log2(k),
    "rejects": lambda k: 1e-6,
}

_TOL = 1e-9


def rho_for_variant(name: str, k: int) -> float:
    """Return the rho of a named variant for group size ``k``."""
    if name not in RHO_PRESETS:
        available = ", ".join(sorted(RHO_PRESETS))
        raise InvalidParameter(f"Unknown CSE variant '{name}'. Available variants: {available}")
    return RHO_PRESETS[name](k)


def _check_rho(rho: float, k: Optional[int]) -> None:
    if not rho > 0:
        raise RhoOutOfRange(f"rho must be > 0, got {rho}")
    if k is not None and rho > math.log2(k) + 1e-12:
        raise RhoOutOfRange(f"rho must be <= log2(k) = {math.log2(k):.6g}, got {rho}")


def f_rho(x: int, rho: float, k: Optional[int] = None) -> int:
    """Survivor count of a group of ``x``: floor(x / 2^rho), at least 1 and below x.

    >>> f_rho(8, 1), f_rho(8, 3), f_rho(8, 0.1)
    (4, 1, 7)
    """
    if x < 1:
        raise InvalidParameter(f"group size must be >= 1, got {x}")
    _check_rho(rho, k)
    kept = math.floor(x / 2.0**rho + _TOL)
    if x >= 2:
        kept = min(max(kept, 1), x - 1)
    return kept


def cse_shape(rho: float, k: int, n: int) -> tuple[int, int, list[int]]:
    """Round counts (R1, R2) and the evaluated-group count of every executed round."""
    if k < 2:
        raise InvalidParameter(f"k must be >= 2, got {k}")
    if n < 2:
        raise InvalidParameter(f"CSE needs at least 2 configurations, got {n}")
    fk = f_rho(k, rho, k)

    r1, s = 0, n
    while s > k:
        s = fk * (s // k) + s % k
        r1 += 1
    r2, s = 0, k
    while s > 1:
        s = f_rho(s, rho, k)
        r2 += 1

    partitions, s = [], n
    while s >= k:
        groups = s // k
        partitions.append(groups)
        s = groups * fk + s % k
    while s > 1:
        partitions.append(1)
        s = f_rho(s, rho, k)
    return r1, r2, partitions


def closed_form_partition_count(rho: float, k: int, n: int, r: int) -> int:
    """Closed-form group count max(1, floor((n/k) (f(k)/k)^(r-1))) of round ``r``."""
    ratio = f_rho(k, rho, k) / k
    return max(1, math.floor((n / k) * ratio ** (r - 1) + _TOL))


def cse_schedule(rho: float, k: int, n: int, budget: int) -> CseSchedule:
    """Round counts, group counts and per-group instance budgets for one CSE call.

    Raises:
        InsufficientBudget: some round would get b_r = 0
    """
    r1, r2, partitions = cse_shape(rho, k, n)
    rounds = r1 + r2
    budgets = [budget // (p * rounds) for p in partitions]
    if any(b < 1 for b in budgets):
        minimum = max(p * rounds for p in partitions)
        raise InsufficientBudget(
            f"CSE with rho={rho:.6g}, k={k}, n={n} needs a budget of at least {minimum} instances, got {budget}"
        )
    return CseSchedule(rho=rho, k=k, n=n, budget=budget, R1=r1, R2=r2, partitions=partitions, budgets=budgets)


class Partition(BaseModel):
    members: list[int] = Field(..., min_length=1)
    passthrough: bool = Field(False, description="Remainder group that advances without evaluation")


def partition_configs(configs: Sequence[int], k: int, rng: SeededRng) -> list[Partition]:
    """Shuffle and cut into groups of ``k``; a short tail group passes through."""
    if len(configs) < 2:
        raise InvalidParameter(f"partitioning needs at least 2 configurations, got {len(configs)}")
    shuffled = rng.shuffled([int(c) for c in configs])
    if len(shuffled) < k:
        return [Partition(members=shuffled)]
    groups = [Partition(members=shuffled[i:i + k]) for i in range(0, len(shuffled), k)]
    if len(groups[-1].members) < k:
        groups[-1].passthrough = True
    return groups


def arm_elimination(
    plan: EliminationPlan,
    oracle: CostOracle,
    kind: StatisticKind,
    rng: SeededRng,
    *,
    epoch: Optional[int] = None,
    round_index: Optional[int] = None,
    partition: Optional[int] = None,
) -> list[int]:
    """Race ``plan.group`` on every instance of the plan and keep the top scorers."""
    if len(plan.instances) != plan.budget:
        raise InvalidParameter(f"plan has {len(plan.instances)} instances for a budget of {plan.budget}")
    if not 1 <= plan.keep_count < len(plan.group):
        raise InvalidParameter(f"keep_count must lie in [1, {len(plan.group)}), got {plan.keep_count}")

    state = StatisticState()
    for instance in plan.instances:
        outcome = oracle.evaluate_group(
            plan.group, instance, epoch=epoch, round_index=round_index, partition=partition
        )
        stat_update(state, outcome)

    scores = [(cid, stat_score(state, cid, kind, oracle.timeout)) for cid in plan.group]
    ranked = rank_with_ties(scores, rng)
    kept, dropped = ranked[:plan.keep_count], ranked[plan.keep_count:]
    if oracle.trace is not None:
        oracle.trace.emit(
            "elimination",
            epoch=epoch,
            round=round_index,
            partition=partition,
            kept=kept,
            dropped=dropped,
            scores={str(cid): score for cid, score in scores},
        )
    return kept


def run_cse(
    configs: Sequence[int],
    k: int,
    budget: int,
    rho: float,
    instances: Sequence[int],
    oracle: CostOracle,
    kind: StatisticKind,
    rng: SeededRng,
    *,
    epoch: Optional[int] = None,
) -> int:
    """Eliminate down to one configuration and return it.

    Each (round, partition) consumes its own slice of ``instances``; slices
    never overlap, so ``instances`` must hold ``budget`` distinct ids.

    Raises:
        InsufficientBudget: before any evaluation, if the schedule cannot be met
    """
    if len(instances) != budget:
        raise InvalidParameter(f"expected {budget} instances, got {len(instances)}")
    if len(set(instances)) != len(instances):
        raise InvalidParameter("instances handed to CSE must be pairwise distinct")
    schedule = cse_schedule(rho, k, len(configs), budget)
    logger.debug(
        "CSE schedule rho=%.4g k=%d n=%d: R1=%d R2=%d P=%s b=%s",
        rho, k, len(configs), schedule.R1, schedule.R2, schedule.partitions, schedule.budgets,
    )

    survivors = [int(c) for c in configs]
    cursor = 0
    for r, (groups_expected, b) in enumerate(zip(schedule.partitions, schedule.budgets), start=1):
        partitions = partition_configs(survivors, k, rng.fork(f"partition/r{r}"))
        evaluated = [p for p in partitions if not p.passthrough]
        if len(evaluated) != groups_expected:
            raise RuntimeError(f"round {r} has {len(evaluated)} groups, schedule expects {groups_expected}")

        advancing: list[int] = []
        for j, part in enumerate(partitions, start=1):
            if part.passthrough:
                if oracle.trace is not None:
                    oracle.trace.emit("passthrough", epoch=epoch, round=r, partition=j, members=part.members)
                advancing.extend(part.members)
                continue
            plan = EliminationPlan(
                group=part.members,
                keep_count=f_rho(len(part.members), rho, k),
                budget=b,
                instances=list(instances[cursor:cursor + b]),
            )
            cursor += b
            advancing.extend(
                arm_elimination(
                    plan, oracle, kind, rng.fork(f"r{r}/p{j}"), epoch=epoch, round_index=r, partition=j
                )
            )
        logger.debug("Round %d: %d -> %d configurations", r, len(survivors), len(advancing))
        survivors = advancing

    if len(survivors) != 1:
        raise RuntimeError(f"CSE ended with {len(survivors)} survivors")
    return survivors[0]

"""
Sufficient budgets and the identities behind the epoch budget split.
"""

from __future__ import annotations

import math
from itertools import product
from pathlib import Path
from typing import Callable, Iterable, Literal, Optional, Sequence

import pandas as pd
from pydantic import BaseModel, Field

from acband.common.errors import InvalidParameter, MissingGapData
from acband.configurators.acband import budget_divisors, epoch_constants, n_alpha_delta
from acband.configurators.cse import cse_shape, f_rho
from acband.data import SyntheticScenario, group_limits

N0Rule = Literal["double", "min", "mid"]
BUDGET_CURVE_COLUMNS = ["k", "alpha", "delta", "n0", "E", "budget"]


class ConvergenceEnvelope:
    """Evaluations needed before a statistic is within ``t`` of its limit."""

    def __init__(self, fn: Callable[[float], float], label: str):
        self._fn = fn
        self.label = label

    def __call__(self, t: float) -> float:
        if t <= 0:
            raise InvalidParameter(f"envelope accuracy must be > 0, got {t}")
        return float(self._fn(t))

    @classmethod
    def constant(cls, value: float = 1.0) -> ConvergenceEnvelope:
        if value <= 0:
            raise InvalidParameter(f"envelope constant must be > 0, got {value}")
        return cls(lambda t: value, f"constant({value})")

    @classmethod
    def hoeffding(cls, failure: float = 0.05) -> ConvergenceEnvelope:
        """ceil(ln(2 / failure) / (2 t^2)) evaluations for a win frequency."""
        if not 0.0 < failure < 1.0:
            raise InvalidParameter(f"failure probability must lie in (0, 1), got {failure}")
        log_term = math.log(2.0 / failure)
        return cls(lambda t: math.ceil(log_term / (2.0 * t * t)), f"hoeffding({failure})")

    def __repr__(self) -> str:
        return f"ConvergenceEnvelope({self.label})"


class GapProfile(BaseModel):
    rounds: list[list[float]] = Field(
        ..., description="Per round, gaps of the best member's group sorted ascending (first entry 0)"
    )


# ==============================================================================
# AC-BAND
# ==============================================================================

def acband_sufficient_budget(
    alpha: float,
    delta: float,
    n0: Optional[int],
    k: int,
    gamma_inv: float = 1.0,
) -> float:
    """gamma_inv * (n0/k) * (C1 E - (2^E - 1)(2 C1 - C2 - C3)) / 2^E."""
    if gamma_inv <= 0:
        raise InvalidParameter(f"gamma_inv must be > 0, got {gamma_inv}")
    const = epoch_constants(k, alpha, delta, n0)
    return gamma_inv * (const.n0 / k) * const.head / 2**const.E


def epoch_fraction_sum(alpha: float, delta: float, n0: Optional[int], k: int) -> float:
    return math.fsum(1.0 / c for c in budget_divisors(epoch_constants(k, alpha, delta, n0)))


def weighted_geometric_sum(a: float, b: float, c: float, n: int) -> float:
    """Direct sum of (-i a + b + c) / 2^i for i = 1..n."""
    return math.fsum((-i * a + b + c) / 2**i for i in range(1, n + 1))


def weighted_geometric_closed_form(a: float, b: float, c: float, n: int) -> float:
    return (a * n - (2**n - 1) * (2 * a - b - c)) / 2**n


def n0_for_rule(n: int, rule: N0Rule) -> int:
    if rule == "double":
        return 2 * n
    if rule == "min":
        return n + 1
    if rule == "mid":
        return max(n + 1, math.floor(1.5 * n))
    raise InvalidParameter(f"Unknown n0 rule {rule!r}; expected double, min or mid")


def budget_curve(
    ks: Iterable[int],
    alphas: Iterable[float],
    deltas: Iterable[float],
    n0_rule: N0Rule = "double",
    gamma_inv: float = 1.0,
) -> pd.DataFrame:
    """Sufficient AC-Band budget over a (k, alpha, delta) grid."""
    rows = []
    for k, alpha, delta in product(list(ks), list(alphas), list(deltas)):
        n0 = n0_for_rule(n_alpha_delta(alpha, delta), n0_rule)
        const = epoch_constants(k, alpha, delta, n0)
        rows.append(
            {
                "k": k,
                "alpha": alpha,
                "delta": delta,
                "n0": n0,
                "E": const.E,
                "budget": acband_sufficient_budget(alpha, delta, n0, k, gamma_inv),
            }
        )
    return pd.DataFrame(rows, columns=BUDGET_CURVE_COLUMNS)


def write_budget_curve(frame: pd.DataFrame, path) -> Path:
    path = Path(path)
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


# ==============================================================================
# CSE
# ==============================================================================

def gap_profile_from_groups(
    scenario: SyntheticScenario,
    best: int,
    groups: Sequence[Sequence[int]],
) -> GapProfile:
    """Exact gaps of the groups ``best`` meets, one group per round."""
    rounds = []
    for r, group in enumerate(groups, start=1):
        if best not in group:
            raise InvalidParameter(f"round {r} group {list(group)} does not contain configuration {best}")
        limits = sorted(group_limits(scenario, group).values(), reverse=True)
        rounds.append([limits[0] - value for value in limits])
    return GapProfile(rounds=rounds)


def cse_sufficient_budget(
    rho: float,
    k: int,
    n: int,
    epsilon: float,
    gaps: GapProfile,
    envelope: ConvergenceEnvelope,
) -> float:
    """R * max P_r * (1 + envelope(max(epsilon / 2, max_r gap_r / 2))).

    ``gap_r`` is the gap of the first arm ranked below the cut in round r.

    Raises:
        MissingGapData: fewer gap rounds than the CSE schedule executes
    """
    r1, r2, partitions = cse_shape(rho, k, n)
    if len(gaps.rounds) < len(partitions):
        raise MissingGapData(f"gap profile covers {len(gaps.rounds)} rounds, CSE runs {len(partitions)}")
    cut_gaps = []
    for round_gaps in gaps.rounds[:len(partitions)]:
        if len(round_gaps) < 2:
            raise MissingGapData("every round needs the gaps of a group with at least two members")
        cut_gaps.append(round_gaps[f_rho(len(round_gaps), rho, k)])
    accuracy = max(epsilon / 2.0, max(cut_gaps) / 2.0)
    return (r1 + r2) * max(partitions) * (1.0 + envelope(accuracy))

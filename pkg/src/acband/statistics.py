"""
Summary statistics over group feedback.

Every statistic is higher-is-better so elimination can keep the top scores
without knowing which statistic produced them.
"""

from __future__ import annotations

from pydantic import BaseModel, Field

from acband.common.models import GroupOutcome, StatisticKind


class ArmCounts(BaseModel):
    wins: int = Field(0, ge=0, description="First finishes")
    trials: int = Field(0, ge=0, description="Group evaluations participated in")
    runtime_sum: float = Field(0.0, ge=0.0, description="Seconds over uncensored observations")
    observations: int = Field(0, ge=0, description="Uncensored observations")


class StatisticState(BaseModel):
    arms: dict[int, ArmCounts] = Field(default_factory=dict)

    def counts(self, config_id: int) -> ArmCounts:
        return self.arms.get(config_id) or ArmCounts()

    def merge(self, other: StatisticState) -> StatisticState:
        """Add another state's counts into a new state (associative, commutative)."""
        merged = StatisticState()
        for source in (self, other):
            for cid, c in source.arms.items():
                acc = merged.arms.setdefault(cid, ArmCounts())
                acc.wins += c.wins
                acc.trials += c.trials
                acc.runtime_sum += c.runtime_sum
                acc.observations += c.observations
        return merged


def stat_update(state: StatisticState, outcome: GroupOutcome) -> StatisticState:
    """Record one capped group evaluation.

    Every participant gains a trial; only the finisher gains a win and a
    runtime observation. Censored members record nothing quantitative.
    """
    for cid in outcome.participants:
        state.arms.setdefault(cid, ArmCounts()).trials += 1
    if outcome.winner is not None:
        arm = state.arms[outcome.winner]
        arm.wins += 1
        arm.runtime_sum += float(outcome.winner_runtime)
        arm.observations += 1
    return state


def stat_score(state: StatisticState, config_id: int, kind: StatisticKind, timeout: float = 0.0) -> float:
    """Score of one configuration under ``kind``.

    Sentinels: a configuration without trials scores 0 under win frequency, and
    one without uncensored observations scores ``-timeout`` under negated
    mean runtime.
    """
    c = state.counts(config_id)
    if kind is StatisticKind.WIN_FREQUENCY:
        return c.wins / c.trials if c.trials else 0.0
    if kind is StatisticKind.NEG_MEAN_RUNTIME:
        return -c.runtime_sum / c.observations if c.observations else -float(timeout)
    raise ValueError(f"Unknown statistic kind: {kind!r}")

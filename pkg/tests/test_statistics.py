import pytest

from acband.common.models import GroupOutcome, StatisticKind
from acband.statistics import StatisticState, stat_score, stat_update


def outcome(participants, winner=None, runtime=None, instance=0):
    charge = len(participants) * (runtime if runtime is not None else 10.0)
    return GroupOutcome(
        instance=instance,
        participants=tuple(participants),
        winner=winner,
        winner_runtime=runtime,
        cpu_charge=charge,
    )


def test_win_frequency_counts_trials_for_everyone():
    state = StatisticState()
    stat_update(state, outcome([0, 1], winner=0, runtime=2.0))
    stat_update(state, outcome([0, 1], winner=1, runtime=4.0, instance=1))
    stat_update(state, outcome([0, 1], winner=0, runtime=1.0, instance=2))
    assert stat_score(state, 0, StatisticKind.WIN_FREQUENCY) == pytest.approx(2 / 3)
    assert stat_score(state, 1, StatisticKind.WIN_FREQUENCY) == pytest.approx(1 / 3)


def test_neg_mean_runtime_uses_uncensored_observations_only():
    state = StatisticState()
    stat_update(state, outcome([0, 1], winner=0, runtime=2.0))
    stat_update(state, outcome([0, 1], winner=0, runtime=4.0, instance=1))
    assert stat_score(state, 0, StatisticKind.NEG_MEAN_RUNTIME) == pytest.approx(-3.0)
    assert state.counts(1).trials == 2
    assert state.counts(1).observations == 0


def test_all_timeout_outcome_records_trials_only():
    state = stat_update(StatisticState(), outcome([3, 4]))
    assert state.counts(3).trials == 1
    assert state.counts(3).wins == 0
    assert stat_score(state, 3, StatisticKind.WIN_FREQUENCY) == 0.0


def test_sentinels_for_unseen_configurations():
    state = StatisticState()
    assert stat_score(state, 9, StatisticKind.WIN_FREQUENCY) == 0.0
    assert stat_score(state, 9, StatisticKind.NEG_MEAN_RUNTIME, timeout=60.0) == -60.0


def test_merge_adds_counts():
    left = stat_update(StatisticState(), outcome([0, 1], winner=0, runtime=2.0))
    right = stat_update(StatisticState(), outcome([0, 2], winner=2, runtime=1.0, instance=1))
    merged = left.merge(right)
    assert merged.counts(0).trials == 2
    assert merged.counts(0).wins == 1
    assert merged.counts(2).runtime_sum == 1.0
    assert right.merge(left).arms == merged.arms
    assert left.counts(0).trials == 1

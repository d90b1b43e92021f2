import math

import numpy as np
import pytest

from acband.common.errors import ConfigNotInSubset, IndexOutOfRange, InvalidParameter
from acband.common.models import RunResult
from acband.common.rng import SeededRng
from acband.metrics import (
    SUMMARY_COLUMNS,
    aggregate_reports,
    evaluate_config,
    evaluate_run,
    percent_gap_to_best,
    percent_gap_to_subset_best,
    r_delta_mean,
    summary_frame,
    total_runtime,
)


@pytest.fixture
def matrix(make_matrix):
    return make_matrix([[1.0, 2.0, 3.0], [2.0, 2.0, 2.0], [10.0, 10.0, 1.0]], timeout=10.0)


def test_gaps(matrix):
    assert total_runtime(matrix, 2) == 21.0
    assert percent_gap_to_best(matrix, 0) == 0.0
    assert percent_gap_to_best(matrix, 2) == pytest.approx(2.5)
    assert percent_gap_to_subset_best(matrix, 2, [2]) == 0.0
    with pytest.raises(ConfigNotInSubset):
        percent_gap_to_subset_best(matrix, 2, [0, 1])
    with pytest.raises(IndexOutOfRange):
        total_runtime(matrix, 3)


def test_capped_mean(matrix):
    assert r_delta_mean(matrix, 2, 0.1) == pytest.approx(7.0)
    assert r_delta_mean(matrix, 2, 0.5) == pytest.approx(5.5)
    assert r_delta_mean(matrix, 2, 0.0) == pytest.approx(7.0)
    with pytest.raises(InvalidParameter):
        r_delta_mean(matrix, 2, 1.0)


@pytest.mark.parametrize("delta_m", [0.9999999999, 1.0 - 1e-15])
def test_capped_mean_keeps_at_least_the_fastest_run(make_matrix, delta_m):
    narrow = make_matrix([[4.0, 1.5]])
    assert r_delta_mean(narrow, 0, delta_m) == 1.5


def test_metrics_match_exhaustive_recomputation(make_matrix):
    draw = SeededRng(12).generator
    for _ in range(100):
        values = draw.uniform(0.1, 50.0, (20, 50))
        m = make_matrix(values, timeout=60.0)
        totals = [math.fsum(row) for row in values]
        config = int(draw.integers(0, 20))
        subset = sorted({config, *(int(c) for c in draw.integers(0, 20, 5))})
        best_subset = min(totals[c] for c in subset)
        assert percent_gap_to_best(m, config) == (totals[config] - min(totals)) / min(totals)
        assert percent_gap_to_subset_best(m, config, subset) == (totals[config] - best_subset) / best_subset
        delta_m = float(draw.uniform(0.0, 0.9))
        keep = math.ceil((1 - delta_m) * 50 - 1e-9)
        expected = math.fsum(np.sort(values[config])[:keep]) / keep
        assert r_delta_mean(m, config, delta_m) == pytest.approx(expected, rel=1e-12)


def test_evaluate_config(matrix):
    report = evaluate_config(matrix, 1, [1, 2], delta_m=0.5, cpu_time=12.0)
    assert report.total_runtime_winner == 6.0
    assert report.total_runtime_best == 6.0
    assert report.gap_to_best == 0.0
    assert report.r_delta == 2.0
    dumped = report.model_dump()
    assert dumped["gap_to_best_percent"] == 0.0
    assert dumped["cpu_time"] == 12.0
    with pytest.raises(ConfigNotInSubset):
        evaluate_config(matrix, 0, [1, 2])


def test_evaluate_run_uses_the_sampled_configurations(matrix):
    result = RunResult(method="acband", seed=3, winner=2, cpu_seconds=40.0, wall_clock=20.0, sampled=[2, 1])
    report = evaluate_run(matrix, result)
    assert report.gap_to_subset_best == pytest.approx(2.5)
    assert report.gap_to_subset_best_percent == pytest.approx(250.0)
    assert report.cpu_time == 40.0


def test_summary_rows(matrix):
    reports = {
        0: evaluate_config(matrix, 0, [0, 1], cpu_time=10.0),
        1: evaluate_config(matrix, 2, [2], cpu_time=30.0),
    }
    frame = aggregate_reports(reports)
    assert list(frame.columns) == SUMMARY_COLUMNS
    assert list(frame.index) == ["0", "1", "mean", "std"]
    assert frame.index.name == "seed"
    assert frame.loc["mean", "cpu_time"] == 20.0
    assert frame.loc["std", "cpu_time"] == pytest.approx(math.sqrt(200.0))
    assert frame.loc["0", "winner"] == 0
    assert frame.loc["1", "winner"] == 2
    assert frame.loc[["mean", "std"], "winner"].isna().all()
    lines = frame.to_csv(lineterminator="\n").splitlines()
    assert lines[1].startswith("0,0,")
    assert lines[3].startswith("mean,,")
    assert lines[4].startswith("std,,")


def test_single_seed_has_zero_spread():
    frame = summary_frame({5: {"cpu_time": 3.0}})
    assert frame.loc["std", "cpu_time"] == 0.0
    assert frame.loc["mean", "cpu_time"] == 3.0

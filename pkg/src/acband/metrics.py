"""
Post-hoc evaluation of returned configurations.

Gaps are ratios; ``EvalReport`` renders the percent values alongside.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping

import pandas as pd

from acband.common.errors import ConfigNotInSubset, IndexOutOfRange, InvalidParameter
from acband.common.models import EvalReport, RunResult
from acband.oracle.matrix import RuntimeMatrix

ID_COLUMN = "winner"
SUMMARY_COLUMNS = [ID_COLUMN, "cpu_time", "gap_to_best", "gap_to_subset_best", "r_delta"]


def total_runtime(matrix: RuntimeMatrix, config_id: int) -> float:
    if not 0 <= config_id < matrix.n_configs:
        raise IndexOutOfRange(f"configuration {config_id} outside [0, {matrix.n_configs})")
    return math.fsum(matrix.values[config_id])


def _best_total(matrix: RuntimeMatrix, configs: Iterable[int]) -> float:
    return min(total_runtime(matrix, c) for c in configs)


def _gap(total: float, best: float) -> float:
    return (total - best) / best


def percent_gap_to_best(matrix: RuntimeMatrix, config_id: int) -> float:
    return _gap(total_runtime(matrix, config_id), _best_total(matrix, range(matrix.n_configs)))


def percent_gap_to_subset_best(matrix: RuntimeMatrix, config_id: int, subset: Iterable[int]) -> float:
    members = set(int(c) for c in subset)
    if config_id not in members:
        raise ConfigNotInSubset(f"configuration {config_id} is not among the {len(members)} sampled configurations")
    return _gap(total_runtime(matrix, config_id), _best_total(matrix, sorted(members)))


def r_delta_mean(matrix: RuntimeMatrix, config_id: int, delta_m: float = 0.1) -> float:
    """Mean over the fastest ceil((1 - delta_m) m) runtimes of a configuration."""
    if not 0.0 <= delta_m < 1.0:
        raise InvalidParameter(f"delta_m must lie in [0, 1), got {delta_m}")
    if not 0 <= config_id < matrix.n_configs:
        raise IndexOutOfRange(f"configuration {config_id} outside [0, {matrix.n_configs})")
    row = sorted(matrix.values[config_id])
    keep = max(1, math.ceil((1.0 - delta_m) * len(row) - 1e-9))
    return math.fsum(row[:keep]) / keep


def evaluate_config(
    matrix: RuntimeMatrix,
    winner: int,
    subset: Iterable[int],
    delta_m: float = 0.1,
    cpu_time: float = 0.0,
) -> EvalReport:
    """Gaps and capped mean of ``winner``; ``subset`` is what the run sampled."""
    members = set(int(c) for c in subset)
    if winner not in members:
        raise ConfigNotInSubset(f"configuration {winner} is not among the {len(members)} sampled configurations")
    totals = [total_runtime(matrix, c) for c in range(matrix.n_configs)]
    best = min(totals)
    subset_best = min(totals[c] for c in members)
    return EvalReport(
        winner=winner,
        total_runtime_winner=totals[winner],
        total_runtime_best=best,
        gap_to_best=_gap(totals[winner], best),
        gap_to_subset_best=_gap(totals[winner], subset_best),
        r_delta=r_delta_mean(matrix, winner, delta_m),
        cpu_time=cpu_time,
    )


def evaluate_run(matrix: RuntimeMatrix, result: RunResult, delta_m: float = 0.1) -> EvalReport:
    return evaluate_config(matrix, result.winner, result.sampled, delta_m, result.cpu_seconds)


def summary_frame(rows: Mapping[int, Mapping[str, float]]) -> pd.DataFrame:
    """One row per seed followed by ``mean`` and ``std`` rows (sample std, 0 for one seed).

    Configuration ids are labels, so ``winner`` stays blank in the ``mean`` and ``std`` rows.
    """
    frame = pd.DataFrame.from_dict({str(seed): dict(row) for seed, row in rows.items()}, orient="index")
    numeric = frame.select_dtypes("number").drop(columns=[ID_COLUMN], errors="ignore")
    spread = numeric.std(ddof=1) if len(frame) > 1 else numeric.std(ddof=0)
    stats = pd.DataFrame([numeric.mean(), spread], index=["mean", "std"])
    combined = pd.concat([frame, stats])
    if ID_COLUMN in combined.columns:
        combined[ID_COLUMN] = combined[ID_COLUMN].astype("Int64")
    combined.index.name = "seed"
    return combined


def aggregate_reports(reports: Mapping[int, EvalReport]) -> pd.DataFrame:
    rows = {
        seed: {
            "winner": report.winner,
            "cpu_time": report.cpu_time,
            "gap_to_best": report.gap_to_best,
            "gap_to_subset_best": report.gap_to_subset_best,
            "r_delta": report.r_delta,
        }
        for seed, report in reports.items()
    }
    return summary_frame(rows)[SUMMARY_COLUMNS]

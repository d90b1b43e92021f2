"""CPU-time ledger for a run."""

from __future__ import annotations

import math
from collections import defaultdict
from typing import Optional


class CpuLedger:
    """Accumulates model CPU seconds with an epoch/round breakdown.

    Totals use ``math.fsum`` over every recorded charge, so the result is the
    correctly rounded sum no matter in which order charges or partial ledgers
    were merged.
    """

    def __init__(self):
        self._entries: list[tuple[Optional[int], Optional[int], float]] = []

    def credit(self, charge: float, *, epoch: Optional[int] = None, round_index: Optional[int] = None) -> None:
        if charge < 0:
            raise ValueError(f"CPU charge must be non-negative, got {charge}")
        self._entries.append((epoch, round_index, float(charge)))

    @property
    def total_seconds(self) -> float:
        return math.fsum(charge for _, _, charge in self._entries)

    @property
    def charges(self) -> list[float]:
        return [charge for _, _, charge in self._entries]

    def __len__(self) -> int:
        return len(self._entries)

    def by_epoch(self) -> dict[Optional[int], float]:
        buckets: dict[Optional[int], list[float]] = defaultdict(list)
        for epoch, _, charge in self._entries:
            buckets[epoch].append(charge)
        return {epoch: math.fsum(values) for epoch, values in buckets.items()}

    def by_round(self) -> dict[tuple[Optional[int], Optional[int]], float]:
        buckets: dict[tuple[Optional[int], Optional[int]], list[float]] = defaultdict(list)
        for epoch, round_index, charge in self._entries:
            buckets[(epoch, round_index)].append(charge)
        return {key: math.fsum(values) for key, values in buckets.items()}

    def breakdown(self, label: str = "epoch") -> dict[str, float]:
        """Per-epoch totals keyed ``"<label>-<n>"`` for JSON payloads."""
        return {
            f"{label}-{epoch}" if epoch is not None else "unscoped": total
            for epoch, total in sorted(self.by_epoch().items(), key=lambda kv: (kv[0] is None, kv[0] or 0))
        }

    def merge(self, other: CpuLedger) -> CpuLedger:
        merged = CpuLedger()
        merged._entries = self._entries + other._entries
        return merged

"""Machine-readable run trace (JSON lines)."""

from __future__ import annotations

import json
from pathlib import Path
from typing import IO, Any, Optional


class RunTrace:
    """Collects trace records and optionally streams them to a JSON-lines file.

    Records hold no timestamps, so two runs with the same seed write
    byte-identical traces.
    """

    def __init__(self, sink: Optional[str | Path] = None, keep: bool = True):
        self.records: list[dict[str, Any]] = []
        self._keep = keep
        self._handle: Optional[IO[str]] = None
        if sink is not None:
            self._handle = open(sink, "w", encoding="utf-8")

    def emit(self, event: str, **fields: Any) -> None:
        record = {"event": event, **fields}
        if self._keep:
            self.records.append(record)
        if self._handle is not None:
            self._handle.write(json.dumps(record, sort_keys=True) + "\n")

    def events(self, event: str) -> list[dict[str, Any]]:
        return [r for r in self.records if r["event"] == event]

    def close(self) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None

    def __enter__(self) -> RunTrace:
        return self

    def __exit__(self, *exc) -> None:
        self.close()

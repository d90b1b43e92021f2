"""
Runtime matrices and capped group evaluation.

A runtime matrix stores one runtime (seconds) per (configuration, instance)
pair; a value equal to the timeout encodes a timed-out run. Group evaluation
models k configurations started together on one instance and stopped as soon
as the first one finishes.

File formats:
- CSV: first line ``#configs=<n>,instances=<m>,timeout=<sec>``, then n rows of
  m comma-separated positive decimals. Row = ConfigId, column = InstanceId.
- Binary: magic ``ACBM1``, three little-endian int64 (n, m, timeout in
  milliseconds), then n*m little-endian float32 runtimes, row-major.
"""

from __future__ import annotations

import io
import logging
import re
import struct
from pathlib import Path
from typing import Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from acband.common.errors import (
    DimensionMismatch,
    IndexOutOfRange,
    InstanceReuse,
    InvalidParameter,
    MalformedFile,
    NonPositiveRuntime,
)
from acband.common.helper_functions import rank_with_ties
from acband.common.models import GroupOutcome
from acband.common.rng import SeededRng
from acband.oracle.ledger import CpuLedger
from acband.oracle.trace import RunTrace

logger = logging.getLogger(__name__)

BINARY_MAGIC = b"ACBM1"
_HEADER = re.compile(
    r"^#\s*configs\s*=\s*(\d+)\s*,\s*instances\s*=\s*(\d+)\s*,\s*timeout\s*=\s*([0-9.eE+-]+)\s*$"
)

MatrixFormat = Literal["csv", "binary"]


class RuntimeMatrix(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray = Field(..., description="Runtimes in seconds, configurations x instances")
    timeout: float = Field(..., gt=0.0, description="Cutoff in seconds; value == timeout means timed out")
    clamped: int = Field(0, ge=0, description="Entries clamped down to the timeout at load time")

    @classmethod
    def from_array(cls, values, timeout: float) -> RuntimeMatrix:
        """Validate and clamp an array into a read-only matrix."""
        array = np.array(values, dtype=np.float64)
        if array.ndim != 2:
            raise DimensionMismatch(f"runtime matrix must be 2-dimensional, got shape {array.shape}")
        if not np.all(np.isfinite(array)):
            raise MalformedFile("runtime matrix contains non-finite values")
        if np.any(array <= 0):
            bad = np.argwhere(array <= 0)[0]
            raise NonPositiveRuntime(
                f"runtime at config {bad[0]}, instance {bad[1]} is {array[bad[0], bad[1]]}; runtimes must be > 0"
            )
        over = array > timeout
        clamped = int(over.sum())
        if clamped:
            logger.warning("Clamped %d runtimes above the %.6g s timeout", clamped, timeout)
            array[over] = timeout
        array.setflags(write=False)
        return cls(values=array, timeout=float(timeout), clamped=clamped)

    @property
    def n_configs(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_instances(self) -> int:
        return int(self.values.shape[1])

    def runtime(self, config_id: int, instance: int) -> float:
        self._check_config(config_id)
        self._check_instance(instance)
        return float(self.values[config_id, instance])

    def _check_config(self, config_id: int) -> None:
        if not 0 <= config_id < self.n_configs:
            raise IndexOutOfRange(f"configuration {config_id} outside [0, {self.n_configs})")

    def _check_instance(self, instance: int) -> None:
        if not 0 <= instance < self.n_instances:
            raise IndexOutOfRange(f"instance {instance} outside [0, {self.n_instances})")


# ==============================================================================
# LOADING AND SAVING
# ==============================================================================

def load_runtime_matrix(path, format: MatrixFormat = "csv") -> RuntimeMatrix:
    """Read a runtime matrix file.

    Args:
        path: file to read
        format: "csv" or "binary"

    Returns:
        The matrix, with values above the timeout clamped to it

    Raises:
        MalformedFile: unreadable header, ragged rows or non-numeric cells
        DimensionMismatch: row/column counts differ from the header
        NonPositiveRuntime: a runtime <= 0
    """
    path = Path(path)
    if format == "csv":
        return _load_csv(path)
    if format == "binary":
        return _load_binary(path)
    raise InvalidParameter(f"Unknown matrix format {format!r}; expected 'csv' or 'binary'")


def _load_csv(path: Path) -> RuntimeMatrix:
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline()
        body = f.read()
    match = _HEADER.match(header.strip())
    if match is None:
        raise MalformedFile(f"{path}: first line must read '#configs=<n>,instances=<m>,timeout=<sec>'")
    n, m, timeout = int(match.group(1)), int(match.group(2)), float(match.group(3))
    if not body.strip():
        raise DimensionMismatch(f"{path}: header declares {n} rows but the file has none")
    try:
        frame = pd.read_csv(io.StringIO(body), header=None, dtype=float, skip_blank_lines=True)
    except (ValueError, pd.errors.ParserError) as e:
        raise MalformedFile(f"{path}: {e}") from e
    if frame.isna().to_numpy().any():
        raise MalformedFile(f"{path}: ragged row or empty cell")
    if frame.shape != (n, m):
        raise DimensionMismatch(f"{path}: header declares {n}x{m}, body is {frame.shape[0]}x{frame.shape[1]}")
    return RuntimeMatrix.from_array(frame.to_numpy(dtype=np.float64), timeout)


def _load_binary(path: Path) -> RuntimeMatrix:
    raw = path.read_bytes()
    head = len(BINARY_MAGIC) + 24
    if len(raw) < head or not raw.startswith(BINARY_MAGIC):
        raise MalformedFile(f"{path}: missing ACBM1 header")
    n, m, timeout_ms = struct.unpack("<qqq", raw[len(BINARY_MAGIC):head])
    if n < 0 or m < 0 or timeout_ms <= 0:
        raise MalformedFile(f"{path}: invalid header values n={n}, m={m}, timeout_ms={timeout_ms}")
    payload = raw[head:]
    if len(payload) != 4 * n * m:
        raise DimensionMismatch(f"{path}: header declares {n}x{m} floats, payload holds {len(payload) // 4}")
    values = np.frombuffer(payload, dtype="<f4").astype(np.float64).reshape(n, m)
    return RuntimeMatrix.from_array(values, timeout_ms / 1000.0)


def save_runtime_matrix(matrix: RuntimeMatrix, path, format: MatrixFormat = "csv") -> Path:
    """Write a matrix in one of the two on-disk formats (deterministic bytes)."""
    path = Path(path)
    if format == "csv":
        timeout = int(matrix.timeout) if float(matrix.timeout).is_integer() else matrix.timeout
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(f"#configs={matrix.n_configs},instances={matrix.n_instances},timeout={timeout}\n")
            pd.DataFrame(matrix.values).to_csv(f, header=False, index=False, lineterminator="\n")
    elif format == "binary":
        with open(path, "wb") as f:
            f.write(BINARY_MAGIC)
            f.write(struct.pack("<qqq", matrix.n_configs, matrix.n_instances, round(matrix.timeout * 1000)))
            f.write(np.ascontiguousarray(matrix.values, dtype="<f4").tobytes())
    else:
        raise InvalidParameter(f"Unknown matrix format {format!r}; expected 'csv' or 'binary'")
    return path


# ==============================================================================
# GROUP EVALUATION
# ==============================================================================

def evaluate_group(
    matrix: RuntimeMatrix,
    group,
    instance: int,
    rng: SeededRng,
    k: Optional[int] = None,
) -> GroupOutcome:
    """Run ``group`` in parallel on ``instance`` and stop at the first finisher.

    Equal minimal runtimes are resolved with ``rng``; an all-timeout group has
    no winner and is charged ``|group| * timeout``.
    """
    members = tuple(int(c) for c in group)
    upper = k if k is not None else len(members)
    if len(members) < 2 or len(members) > upper:
        raise InvalidParameter(f"group size must lie in [2, {upper}], got {len(members)}")
    if len(set(members)) != len(members):
        raise InvalidParameter(f"group contains duplicate configurations: {members}")
    for cid in members:
        matrix._check_config(cid)
    matrix._check_instance(instance)

    runtimes = matrix.values[list(members), instance]
    fastest = float(runtimes.min())
    if fastest < matrix.timeout:
        tied = [(members[i], -float(runtimes[i])) for i in np.flatnonzero(runtimes == fastest)]
        winner = tied[0][0] if len(tied) == 1 else rank_with_ties(tied, rng)[0]
        return GroupOutcome(
            instance=instance,
            participants=members,
            winner=winner,
            winner_runtime=fastest,
            cpu_charge=len(members) * fastest,
        )
    return GroupOutcome(
        instance=instance,
        participants=members,
        winner=None,
        winner_runtime=None,
        cpu_charge=len(members) * matrix.timeout,
    )


class MatrixOracle:
    """Cost oracle backed by a runtime matrix, scoped to one run.

    Tracks consumed instances (an instance may serve one group evaluation per
    run), credits the ledger, and writes one trace record per evaluation.
    """

    def __init__(
        self,
        matrix: RuntimeMatrix,
        rng: SeededRng,
        *,
        k: Optional[int] = None,
        ledger: Optional[CpuLedger] = None,
        trace: Optional[RunTrace] = None,
    ):
        self.matrix = matrix
        self.k = k
        self.ledger = ledger if ledger is not None else CpuLedger()
        self.trace = trace
        self._rng = rng
        self._consumed: set[int] = set()

    @property
    def n_configs(self) -> int:
        return self.matrix.n_configs

    @property
    def n_instances(self) -> int:
        return self.matrix.n_instances

    @property
    def timeout(self) -> float:
        return self.matrix.timeout

    @property
    def consumed(self) -> frozenset[int]:
        return frozenset(self._consumed)

    def evaluate_group(
        self,
        group,
        instance: int,
        *,
        epoch: Optional[int] = None,
        round_index: Optional[int] = None,
        partition: Optional[int] = None,
    ) -> GroupOutcome:
        if instance in self._consumed:
            raise InstanceReuse(f"instance {instance} was already consumed in this run")
        outcome = evaluate_group(self.matrix, group, instance, self._rng.fork(f"tie/{instance}"), self.k)
        self._consumed.add(instance)
        self.ledger.credit(outcome.cpu_charge, epoch=epoch, round_index=round_index)
        if self.trace is not None:
            self.trace.emit(
                "group",
                epoch=epoch,
                round=round_index,
                partition=partition,
                instance=outcome.instance,
                participants=list(outcome.participants),
                winner=outcome.winner,
                winner_runtime=outcome.winner_runtime,
                cpu_charge=outcome.cpu_charge,
            )
        return outcome

    def evaluate_single(self, config_id: int, instance: int, *, bracket: Optional[int] = None) -> float:
        """Uncapped individual run; charged at the full stored runtime."""
        runtime = self.matrix.runtime(config_id, instance)
        self.ledger.credit(runtime, epoch=bracket)
        if self.trace is not None:
            self.trace.emit("single", bracket=bracket, config=config_id, instance=instance, runtime=runtime)
        return runtime

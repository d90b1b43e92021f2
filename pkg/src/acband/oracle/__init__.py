"""Cost oracles: matrix look-ups, external runners, and CPU accounting."""

from typing import Optional, Protocol, Sequence, runtime_checkable

from acband.common.models import ConfigId, GroupOutcome, InstanceId
from acband.oracle.external import ExternalOracle, run_external
from acband.oracle.ledger import CpuLedger
from acband.oracle.matrix import (
    MatrixOracle,
    RuntimeMatrix,
    evaluate_group,
    load_runtime_matrix,
    save_runtime_matrix,
)
from acband.oracle.trace import RunTrace


@runtime_checkable
class CostOracle(Protocol):
    """What the configurators need from an oracle."""

    ledger: CpuLedger
    trace: Optional[RunTrace]

    @property
    def n_configs(self) -> int: ...

    @property
    def n_instances(self) -> int: ...

    @property
    def timeout(self) -> float: ...

    def evaluate_group(
        self,
        group: Sequence[ConfigId],
        instance: InstanceId,
        *,
        epoch: Optional[int] = None,
        round_index: Optional[int] = None,
        partition: Optional[int] = None,
    ) -> GroupOutcome: ...

    def evaluate_single(self, config_id: ConfigId, instance: InstanceId, *, bracket: Optional[int] = None) -> float: ...


__all__ = [
    "CostOracle",
    "CpuLedger",
    "ExternalOracle",
    "MatrixOracle",
    "RunTrace",
    "RuntimeMatrix",
    "evaluate_group",
    "load_runtime_matrix",
    "run_external",
    "save_runtime_matrix",
]

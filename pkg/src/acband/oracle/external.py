"""
First-finisher runner for real target algorithms.

Every member of a group is spawned as its own subprocess on the same
instance; the first member that exits successfully wins and its siblings
are killed. Runtime is the wall-clock of the finisher.
"""

from __future__ import annotations

import asyncio
import logging
import os
from typing import Any, Optional, Sequence

from acband.common.errors import (
    IndexOutOfRange,
    InstanceReuse,
    InvalidParameter,
    SpawnFailure,
)
from acband.common.models import ExternalRunnerSpec, ExternalSource, GroupOutcome
from acband.oracle.ledger import CpuLedger
from acband.oracle.trace import RunTrace

logger = logging.getLogger(__name__)


def render_command(runner: ExternalRunnerSpec, params: dict[str, Any], instance_path: str) -> list[str]:
    """Fill ``{instance}`` and ``{<param>}`` placeholders of the argv template."""
    values = {**{str(k): v for k, v in params.items()}, "instance": instance_path}
    try:
        return [token.format_map(values) for token in runner.command]
    except KeyError as e:
        raise InvalidParameter(f"command template references unknown parameter {e}") from e


async def _kill(procs) -> None:
    for proc in procs:
        if proc.returncode is None:
            try:
                proc.kill()
            except ProcessLookupError:
                pass
    for proc in procs:
        await proc.wait()


async def _race(runner: ExternalRunnerSpec, argvs: list[list[str]]) -> tuple[Optional[int], float]:
    """Run argvs concurrently; return (index of first successful exit or None, elapsed)."""
    loop = asyncio.get_running_loop()
    env = {**os.environ, **runner.env} if runner.env else None
    procs = []
    try:
        for argv in argvs:
            procs.append(
                await asyncio.create_subprocess_exec(
                    *argv,
                    cwd=runner.cwd,
                    env=env,
                    stdout=asyncio.subprocess.DEVNULL,
                    stderr=asyncio.subprocess.DEVNULL,
                )
            )
    except OSError as e:
        await _kill(procs)
        raise SpawnFailure(f"could not spawn {argvs[len(procs)][0]!r}: {e}") from e

    start = loop.time()
    waiters = {asyncio.ensure_future(proc.wait()): i for i, proc in enumerate(procs)}
    pending = set(waiters)
    winner: Optional[int] = None
    try:
        while pending and winner is None:
            remaining = runner.timeout - (loop.time() - start)
            if remaining <= 0:
                break
            done, pending = await asyncio.wait(pending, timeout=remaining, return_when=asyncio.FIRST_COMPLETED)
            for task in sorted(done, key=waiters.get):
                index = waiters[task]
                code = task.result()
                if code == 0:
                    winner = index
                    break
                if not runner.nonzero_exit_as_timeout:
                    raise SpawnFailure(f"{argvs[index][0]!r} exited with code {code}")
                logger.info("Member %d exited with code %d; treated as timed out", index, code)
        elapsed = loop.time() - start
    finally:
        await _kill(procs)
        for task in pending:
            task.cancel()
    return winner, elapsed


def run_external(
    runner: ExternalRunnerSpec,
    group: Sequence[tuple[int, dict[str, Any]]],
    instance_path: str,
    *,
    instance_id: int = 0,
) -> GroupOutcome:
    """Race ``group`` on one instance and report the capped outcome.

    Args:
        runner: command template and timeout
        group: (ConfigId, parameter assignment) pairs
        instance_path: substituted for ``{instance}``
        instance_id: InstanceId recorded in the outcome

    Raises:
        SpawnFailure: a member could not be started, or exited non-zero while
            ``nonzero_exit_as_timeout`` is off
    """
    ids = tuple(int(cid) for cid, _ in group)
    argvs = [render_command(runner, params, instance_path) for _, params in group]
    index, elapsed = asyncio.run(_race(runner, argvs))
    if index is not None and elapsed < runner.timeout:
        return GroupOutcome(
            instance=instance_id,
            participants=ids,
            winner=ids[index],
            winner_runtime=elapsed,
            cpu_charge=len(ids) * elapsed,
        )
    return GroupOutcome(
        instance=instance_id,
        participants=ids,
        winner=None,
        winner_runtime=None,
        cpu_charge=len(ids) * runner.timeout,
    )


class ExternalOracle:
    """Oracle that spawns the target algorithm instead of looking up runtimes."""

    def __init__(
        self,
        source: ExternalSource,
        *,
        k: Optional[int] = None,
        ledger: Optional[CpuLedger] = None,
        trace: Optional[RunTrace] = None,
    ):
        self.runner = source.runner
        self.configurations = source.configurations
        self.instances = source.instances
        self.k = k
        self.ledger = ledger if ledger is not None else CpuLedger()
        self.trace = trace
        self._consumed: set[int] = set()

    @property
    def n_configs(self) -> int:
        return len(self.configurations)

    @property
    def n_instances(self) -> int:
        return len(self.instances)

    @property
    def timeout(self) -> float:
        return self.runner.timeout

    def _members(self, group) -> list[tuple[int, dict[str, Any]]]:
        members = []
        for cid in group:
            cid = int(cid)
            if not 0 <= cid < self.n_configs:
                raise IndexOutOfRange(f"configuration {cid} outside [0, {self.n_configs})")
            members.append((cid, self.configurations[cid]))
        return members

    def _instance_path(self, instance: int) -> str:
        if not 0 <= instance < self.n_instances:
            raise IndexOutOfRange(f"instance {instance} outside [0, {self.n_instances})")
        return self.instances[instance]

    def evaluate_group(
        self,
        group,
        instance: int,
        *,
        epoch: Optional[int] = None,
        round_index: Optional[int] = None,
        partition: Optional[int] = None,
    ) -> GroupOutcome:
        members = self._members(group)
        upper = self.k if self.k is not None else len(members)
        if len(members) < 2 or len(members) > upper:
            raise InvalidParameter(f"group size must lie in [2, {upper}], got {len(members)}")
        if instance in self._consumed:
            raise InstanceReuse(f"instance {instance} was already consumed in this run")
        outcome = run_external(self.runner, members, self._instance_path(instance), instance_id=instance)
        self._consumed.add(instance)
        self.ledger.credit(outcome.cpu_charge, epoch=epoch, round_index=round_index)
        if self.trace is not None:
            self.trace.emit(
                "group",
                epoch=epoch,
                round=round_index,
                partition=partition,
                instance=instance,
                participants=list(outcome.participants),
                winner=outcome.winner,
                winner_runtime=outcome.winner_runtime,
                cpu_charge=outcome.cpu_charge,
            )
        return outcome

    def evaluate_single(self, config_id: int, instance: int, *, bracket: Optional[int] = None) -> float:
        """Run one configuration alone; a timed-out or failed run costs the timeout."""
        members = self._members([config_id])
        outcome = run_external(self.runner, members, self._instance_path(instance), instance_id=instance)
        runtime = outcome.winner_runtime if outcome.winner is not None else self.runner.timeout
        self.ledger.credit(runtime, epoch=bracket)
        if self.trace is not None:
            self.trace.emit("single", bracket=bracket, config=config_id, instance=instance, runtime=runtime)
        return runtime

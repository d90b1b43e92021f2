from __future__ import annotations

from enum import Enum
from typing import Any, Literal, NewType, Optional

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator

ConfigId = NewType("ConfigId", int)
InstanceId = NewType("InstanceId", int)


class StatisticKind(str, Enum):
    """Higher-is-better summaries of a configuration's feedback within a group."""

    WIN_FREQUENCY = "win_frequency"
    NEG_MEAN_RUNTIME = "neg_mean_runtime"


class ACBandParams(BaseModel):
    k: int = Field(2, ge=2, description="Group size: configurations run in parallel per instance")
    alpha: float = Field(0.05, gt=0.0, lt=1.0, description="Proportion of epsilon-best configurations")
    delta: float = Field(0.05, gt=0.0, lt=1.0, description="Failure probability")
    epsilon: float = Field(0.05, gt=0.0, description="Suboptimality relaxation, reported only")
    n0: Optional[int] = Field(None, ge=2, description="Initial sample-size parameter, in (N, 2N]; defaults to 2N")
    budget: Optional[int] = Field(None, ge=1, description="Total number of distinct instances; defaults to all instances")
    seed: int = Field(0, ge=0, lt=2**64, description="64-bit RNG seed")
    sample_size: Optional[int] = Field(
        None, ge=1, description="Overrides N_{alpha,delta} with an explicit number of configurations to sample"
    )


class HyperbandParams(BaseModel):
    eta: int = Field(3, ge=2, description="Reduction factor between rungs")
    n_max: int = Field(81, ge=1, description="Maximum number of configurations per bracket")
    budget: Optional[int] = Field(None, ge=1, description="Total (configuration, instance) evaluations")
    seed: int = Field(0, ge=0, lt=2**64, description="64-bit RNG seed")


class GroupOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    instance: InstanceId = Field(..., ge=0, description="Instance the group was run on")
    participants: tuple[ConfigId, ...] = Field(..., description="Configurations run in parallel")
    winner: Optional[ConfigId] = Field(None, description="First finisher, None when every member timed out")
    winner_runtime: Optional[float] = Field(None, description="Runtime of the first finisher in seconds")
    cpu_charge: float = Field(..., ge=0.0, description="|participants| x capped runtime in seconds")

    @property
    def censored(self) -> tuple[ConfigId, ...]:
        return tuple(p for p in self.participants if p != self.winner)


class EliminationPlan(BaseModel):
    group: list[ConfigId] = Field(..., min_length=2, description="Configurations of one partition")
    keep_count: int = Field(..., ge=1, description="f_rho(|group|) survivors")
    budget: int = Field(..., ge=1, description="Number of instances b the group is run on")
    instances: list[InstanceId] = Field(..., description="Instance slice reserved for this plan")


class CseSchedule(BaseModel):
    rho: float
    k: int
    n: int
    budget: int
    R1: int = Field(..., description="Rounds of the partitioned phase")
    R2: int = Field(..., description="Rounds of the single-group phase")
    partitions: list[int] = Field(..., description="Evaluated groups P_r per executed round")
    budgets: list[int] = Field(..., description="Per-group instance budget b_r per executed round")

    @property
    def R(self) -> int:
        return self.R1 + self.R2

    @property
    def quotas(self) -> list[int]:
        return [p * b for p, b in zip(self.partitions, self.budgets)]

    @property
    def instances_needed(self) -> int:
        return sum(self.quotas)


class EpochPlan(BaseModel):
    epoch: int = Field(..., ge=1)
    n: int = Field(..., ge=2, description="Configurations entering CSE, incumbent included")
    rho: float = Field(..., gt=0.0)
    c: float = Field(..., gt=0.0, description="Budget divisor c_e")
    budget: int = Field(..., ge=0, description="B_e = floor(B / c_e)")


class EpochSchedule(BaseModel):
    N_alpha_delta: int
    n0: int
    E: int
    q: float
    C1: float
    C2: float
    C3: float
    epochs: list[EpochPlan]

    @property
    def total_sampled(self) -> int:
        return 1 + sum(plan.n - 1 for plan in self.epochs)


class EpochRecord(BaseModel):
    epoch: int
    incumbent: int = Field(..., description="Winner carried over from the previous epoch")
    sampled: list[int] = Field(..., description="Fresh configurations drawn in this epoch")
    winner: int
    instances_used: int
    budget: int
    rho: float
    cpu_seconds: float


class BracketRecord(BaseModel):
    bracket: int
    rungs: list[tuple[int, int]] = Field(..., description="(n_i, r_i) per rung")
    sampled: list[int]
    best: int
    best_loss: float
    reused_instances: bool = False


class RunResult(BaseModel):
    method: str
    seed: int
    winner: int
    cpu_seconds: float
    wall_clock: float = Field(..., description="Ledger divided by the number of parallel cores")
    sampled: list[int] = Field(..., description="Every configuration the run looked at, in sampling order")
    ledger: dict[str, float] = Field(default_factory=dict, description="CPU seconds per epoch/bracket")
    epochs: list[EpochRecord] = Field(default_factory=list)
    brackets: list[BracketRecord] = Field(default_factory=list)
    schedule: dict = Field(default_factory=dict, description="Echo of the schedule that produced the run")

    @computed_field
    @property
    def total_sampled(self) -> int:
        return len(self.sampled)


class EvalReport(BaseModel):
    winner: int
    total_runtime_winner: float
    total_runtime_best: float
    gap_to_best: float = Field(..., ge=0.0, description="Ratio, 0 for the best configuration")
    gap_to_subset_best: float = Field(..., ge=0.0)
    r_delta: float = Field(..., description="Mean runtime over the fastest (1 - delta_m) share of instances")
    cpu_time: float = 0.0

    @computed_field
    @property
    def gap_to_best_percent(self) -> float:
        return 100.0 * self.gap_to_best

    @computed_field
    @property
    def gap_to_subset_best_percent(self) -> float:
        return 100.0 * self.gap_to_subset_best


# ==============================================================================
# SCENARIO FILES
# ==============================================================================

class ExternalRunnerSpec(BaseModel):
    command: list[str] = Field(
        ..., min_length=1, description="argv template; '{instance}' and '{<param>}' placeholders are filled per run"
    )
    timeout: float = Field(..., gt=0.0, description="Seconds before every member of a group is killed")
    cwd: Optional[str] = Field(None, description="Working directory of the spawned processes")
    env: dict[str, str] = Field(default_factory=dict, description="Environment additions")
    nonzero_exit_as_timeout: bool = Field(
        True, description="A failing member drops out of the race instead of aborting the run"
    )

    @field_validator("command")
    @classmethod
    def _one_instance_placeholder(cls, command: list[str]) -> list[str]:
        count = sum(token.count("{instance}") for token in command)
        if count != 1:
            raise ValueError(f"command template must contain exactly one '{{instance}}' placeholder, found {count}")
        return command


class DatasetSource(BaseModel):
    path: str = Field(..., description="Runtime matrix file")
    format: Literal["csv", "binary"] = Field("csv", description="Matrix encoding")


class SyntheticSource(BaseModel):
    n_configs: int = Field(..., ge=2)
    n_instances: int = Field(..., ge=1)
    alpha: float = Field(0.2, gt=0.0, le=1.0, description="Target share of epsilon-best configurations")
    epsilon: float = Field(0.1, ge=0.0)
    timeout: float = Field(900.0, gt=0.0)
    seed: int = Field(0, ge=0, lt=2**64)
    distribution: Literal["exponential", "lognormal"] = "exponential"
    sigma: float = Field(1.5, gt=0.0, description="Log-normal shape, used by the lognormal distribution only")


class ExternalSource(BaseModel):
    runner: ExternalRunnerSpec
    configurations: list[dict[str, Any]] = Field(..., min_length=2, description="Parameter assignments, one per ConfigId")
    instances: list[str] = Field(..., min_length=1, description="Instance paths, one per InstanceId")


class MethodParams(BaseModel):
    k: int = Field(2, ge=2)
    alpha: float = Field(0.05, gt=0.0, lt=1.0)
    delta: float = Field(0.05, gt=0.0, lt=1.0)
    epsilon: float = Field(0.05, gt=0.0)
    n0: Optional[int] = Field(None, ge=2)
    budget: Optional[int] = Field(None, ge=1)
    sample_size: Optional[int] = Field(None, ge=1)
    eta: int = Field(3, ge=2)
    n_max: int = Field(81, ge=1)
    statistic: StatisticKind = StatisticKind.WIN_FREQUENCY
    delta_m: float = Field(0.1, ge=0.0, lt=1.0, description="Cutoff of the capped-mean metric")


class ScenarioSettings(BaseModel):
    dataset: Optional[DatasetSource] = None
    synthetic: Optional[SyntheticSource] = None
    external: Optional[ExternalSource] = None
    method: Literal["acband", "hyperband"] = "acband"
    params: MethodParams = Field(default_factory=MethodParams)
    seeds: list[int] = Field(..., min_length=1, description="Explicit list of run seeds")
    output: str = Field("results", description="Directory receiving result files")

    @model_validator(mode="after")
    def _exactly_one_source(self) -> "ScenarioSettings":
        sources = [s for s in (self.dataset, self.synthetic, self.external) if s is not None]
        if len(sources) != 1:
            raise ValueError("scenario needs exactly one of 'dataset', 'synthetic' or 'external'")
        return self

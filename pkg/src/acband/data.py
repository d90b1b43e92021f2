"""
Dataset ingestion and synthetic scenarios with known ground truth.

In an exponential scenario every configuration has a rate lambda and its
runtime on a fresh instance is Exponential(lambda). The chance that a member
of a group finishes first is then lambda / sum(lambda over the group), which
makes the limit statistic, the gaps and the epsilon-best set exact.
"""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from acband.common.errors import DimensionMismatch, InfeasibleAlpha, InvalidParameter, MalformedFile
from acband.common.rng import SeededRng
from acband.oracle.matrix import MatrixFormat, RuntimeMatrix, load_runtime_matrix, save_runtime_matrix

logger = logging.getLogger(__name__)

# rates are scaled so the slowest mean runtime is timeout / HARDNESS_SCALE
HARDNESS_SCALE = 20.0
_MIN_RUNTIME = 1e-12


class SyntheticScenario(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    rates: list[float] = Field(..., description="Exponential rate per configuration")
    matrix: RuntimeMatrix
    epsilon: float = Field(..., ge=0.0)
    alpha_realized: float = Field(..., ge=0.0, le=1.0, description="Share of epsilon-best configurations")
    seed: int = 0

    @property
    def n_configs(self) -> int:
        return len(self.rates)

    def limit(self, config_id: int, group: Iterable[int]) -> float:
        """Limit win frequency of ``config_id`` inside ``group``."""
        members = list(group)
        return self.rates[config_id] / math.fsum(self.rates[c] for c in members)


def scenario_from_rates(
    rates,
    n_instances: int,
    epsilon: float,
    timeout: float = 900.0,
    seed: int = 0,
) -> SyntheticScenario:
    """Draw the runtime matrix for fixed rates."""
    rates = [float(r) for r in rates]
    if len(rates) < 2 or any(r <= 0 for r in rates):
        raise InvalidParameter("need at least two positive rates")
    if n_instances < 1:
        raise InvalidParameter(f"n_instances must be >= 1, got {n_instances}")
    scale = 1.0 / np.asarray(rates)[:, None]
    draws = SeededRng(seed).fork("runtimes").exponential(scale, (len(rates), n_instances))
    matrix = RuntimeMatrix.from_array(np.clip(draws, _MIN_RUNTIME, timeout), timeout)
    scenario = SyntheticScenario(rates=rates, matrix=matrix, epsilon=epsilon, alpha_realized=0.0, seed=seed)
    scenario.alpha_realized = len(epsilon_best_set(scenario)) / len(rates)
    return scenario


def generate_exponential_scenario(
    n_configs: int,
    n_instances: int,
    target_alpha: float,
    epsilon: float,
    timeout: float = 900.0,
    seed: int = 0,
    separation: float = 0.5,
) -> SyntheticScenario:
    """Scenario with exactly ceil(target_alpha * n_configs) epsilon-best configurations.

    One configuration gets the top rate, ``m - 1`` get rates inside the
    epsilon band below it, and the rest get rates at most ``1 - separation``
    times the band's lower edge.

    Raises:
        InfeasibleAlpha: target_alpha outside (0, 1], or the target cannot be
            met for this epsilon
    """
    if n_configs < 2:
        raise InvalidParameter(f"n_configs must be >= 2, got {n_configs}")
    if not 0.0 < target_alpha <= 1.0:
        raise InfeasibleAlpha(f"target_alpha must lie in (0, 1], got {target_alpha}")
    if epsilon < 0:
        raise InvalidParameter(f"epsilon must be >= 0, got {epsilon}")
    if not 0.0 < separation < 1.0:
        raise InvalidParameter(f"separation must lie in (0, 1), got {separation}")

    wanted = math.ceil(target_alpha * n_configs - 1e-9)
    rng = SeededRng(seed).fork("rates")
    low = HARDNESS_SCALE / timeout

    if epsilon >= 1.0:
        if wanted != n_configs:
            raise InfeasibleAlpha(
                f"with epsilon={epsilon} >= 1 every configuration is epsilon-best; target_alpha must be 1"
            )
        rates = list(rng.uniform(low, 10.0 * low, n_configs))
    elif epsilon == 0.0 and wanted > 1:
        raise InfeasibleAlpha(
            f"with epsilon=0 only the top configuration is epsilon-best; target_alpha={target_alpha} asks for {wanted}"
        )
    else:
        top = 10.0 * low * (1.0 + epsilon) / (1.0 - epsilon)
        threshold = top * (1.0 - epsilon) / (1.0 + epsilon)
        near = rng.uniform(threshold + 1e-3 * (top - threshold), top, wanted - 1)
        far = rng.uniform(low, threshold * (1.0 - separation), n_configs - wanted)
        rates = rng.shuffled([top, *near, *far])

    scenario = scenario_from_rates(rates, n_instances, epsilon, timeout, seed)
    realized = len(epsilon_best_set(scenario))
    if realized != wanted:
        raise InfeasibleAlpha(f"generator produced {realized} epsilon-best configurations, wanted {wanted}")
    logger.info("Generated %dx%d exponential scenario, alpha=%.4g", n_configs, n_instances, realized / n_configs)
    return scenario


def generate_lognormal_matrix(
    n_configs: int,
    n_instances: int,
    *,
    sigma: float = 1.5,
    timeout: float = 900.0,
    seed: int = 0,
    spread: float = 0.5,
    noise: float = 0.2,
    stall_max: float = 0.03,
) -> RuntimeMatrix:
    """Heavy-tailed runtimes without closed-form ground truth.

    log runtime = instance hardness (N(0, sigma)) + configuration offset
    (U[0, spread]) + run noise (N(0, noise)). Each configuration also stalls
    with its own probability in [0, stall_max]; a stalled run hits the timeout.
    """
    if n_configs < 1 or n_instances < 1:
        raise InvalidParameter("matrix dimensions must be positive")
    rng = SeededRng(seed)
    hardness = rng.fork("hardness").generator.normal(0.0, sigma, n_instances)
    offset = rng.fork("offset").uniform(0.0, spread, n_configs)
    jitter = rng.fork("noise").generator.normal(0.0, noise, (n_configs, n_instances))
    values = np.exp(hardness[None, :] + offset[:, None] + jitter)
    stall = rng.fork("stall").uniform(0.0, stall_max, n_configs)
    values[rng.fork("stalled").random((n_configs, n_instances)) < stall[:, None]] = timeout
    return RuntimeMatrix.from_array(np.clip(values, _MIN_RUNTIME, timeout), timeout)


def epsilon_best_set(scenario: SyntheticScenario) -> set[int]:
    """Configurations whose pairwise gap to the top rate is at most epsilon."""
    top = max(scenario.rates)
    return {
        cid
        for cid, rate in enumerate(scenario.rates)
        if (top - rate) / (top + rate) <= scenario.epsilon + 1e-12
    }


def group_limits(scenario: SyntheticScenario, group: Iterable[int]) -> dict[int, float]:
    members = list(group)
    total = math.fsum(scenario.rates[c] for c in members)
    return {c: scenario.rates[c] / total for c in members}


# ==============================================================================
# FILES
# ==============================================================================

def parse_matrix_csv(path) -> RuntimeMatrix:
    return load_runtime_matrix(path, "csv")


def sidecar_path(matrix_path) -> Path:
    return Path(matrix_path).with_suffix(".json")


def save_scenario(
    scenario: SyntheticScenario,
    directory,
    stem: str = "scenario",
    format: MatrixFormat = "csv",
) -> tuple[Path, Path]:
    """Write the matrix and a ``{lambdas, epsilon, alpha_realized, seed}`` sidecar."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    matrix_path = directory / f"{stem}.{'csv' if format == 'csv' else 'bin'}"
    save_runtime_matrix(scenario.matrix, matrix_path, format)
    sidecar = sidecar_path(matrix_path)
    payload = {
        "lambdas": scenario.rates,
        "epsilon": scenario.epsilon,
        "alpha_realized": scenario.alpha_realized,
        "seed": scenario.seed,
    }
    sidecar.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return matrix_path, sidecar


def load_scenario(matrix_path, format: MatrixFormat = "csv", sidecar: Optional[Path] = None) -> SyntheticScenario:
    matrix = load_runtime_matrix(matrix_path, format)
    sidecar = Path(sidecar) if sidecar is not None else sidecar_path(matrix_path)
    try:
        payload = json.loads(sidecar.read_text(encoding="utf-8"))
        rates = [float(x) for x in payload["lambdas"]]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise MalformedFile(f"{sidecar}: not a scenario sidecar ({e})") from e
    if len(rates) != matrix.n_configs:
        raise DimensionMismatch(f"{sidecar}: {len(rates)} rates for {matrix.n_configs} configurations")
    return SyntheticScenario(
        rates=rates,
        matrix=matrix,
        epsilon=float(payload.get("epsilon", 0.0)),
        alpha_realized=float(payload.get("alpha_realized", 0.0)),
        seed=int(payload.get("seed", 0)),
    )

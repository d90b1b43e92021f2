"""
Central Method Registry for acband

Single source of truth for the configuration methods a scenario file may name.
Every entry takes the scenario's MethodParams, a fresh oracle and a seed, and
returns a RunResult, so the CLI never branches on method names.

Usage Pattern:
1. Methods are registered in METHOD_REGISTRY with their runner callables
2. The CLI resolves ``scenario.method`` with get_method()
3. validate_method_params() reports which parameters a method ignores
"""

from __future__ import annotations

import json
from typing import TYPE_CHECKING, Any, Callable, Dict, List, Optional

from acband.common.models import ACBandParams, HyperbandParams, MethodParams, RunResult
from acband.common.rng import SeededRng
from acband.configurators.acband import run_acband
from acband.configurators.hyperband import run_hyperband

if TYPE_CHECKING:
    from acband.oracle import CostOracle

MethodRunner = Callable[[MethodParams, "CostOracle", int], RunResult]


def acband_params(params: MethodParams, seed: int) -> ACBandParams:
    return ACBandParams(
        k=params.k,
        alpha=params.alpha,
        delta=params.delta,
        epsilon=params.epsilon,
        n0=params.n0,
        budget=params.budget,
        seed=seed,
        sample_size=params.sample_size,
    )


def hyperband_params(params: MethodParams, seed: int) -> HyperbandParams:
    return HyperbandParams(eta=params.eta, n_max=params.n_max, budget=params.budget, seed=seed)


def _run_acband(params: MethodParams, oracle: CostOracle, seed: int) -> RunResult:
    return run_acband(acband_params(params, seed), oracle, params.statistic, SeededRng(seed))


def _run_hyperband(params: MethodParams, oracle: CostOracle, seed: int) -> RunResult:
    return run_hyperband(hyperband_params(params, seed), oracle, SeededRng(seed))


# ==============================================================================
# METHOD REGISTRY - Single Source of Truth for All Configuration Methods
# ==============================================================================

METHOD_REGISTRY: Dict[str, MethodRunner] = {
    "acband": _run_acband,
    "hyperband": _run_hyperband,
}


# ==============================================================================
# METHOD METADATA
# ==============================================================================

METHOD_DESCRIPTIONS: Dict[str, Dict[str, Any]] = {
    "acband": {
        "category": "Capped parallel",
        "description": "Epochs of combinatorial successive elimination over groups of k configurations",
        "params": ["k", "alpha", "delta", "epsilon", "n0", "budget", "sample_size", "statistic"],
        "parallel_cores": "k",
    },
    "hyperband": {
        "category": "Baseline",
        "description": "Successive-halving brackets over instances, individual uncapped runs, mean-runtime loss",
        "params": ["eta", "n_max", "budget"],
        "parallel_cores": "1",
    },
}


# ==============================================================================
# HELPER FUNCTIONS
# ==============================================================================

def get_method(name: str) -> MethodRunner:
    """
    Resolve a method name from a scenario file to its runner.

    Raises:
        ValueError: the name is not registered

    Example:
        >>> result = get_method("acband")(MethodParams(k=2), oracle, 7)
    """
    if name not in METHOD_REGISTRY:
        raise ValueError(
            f"Method '{name}' not found in METHOD_REGISTRY. "
            f"Available methods: {list(METHOD_REGISTRY.keys())}"
        )
    return METHOD_REGISTRY[name]


def get_available_methods(names: Optional[List[str]] = None) -> str:
    """JSON listing of registered methods with their descriptions."""
    names = list(METHOD_REGISTRY.keys()) if names is None else names
    available, unavailable = [], []
    for name in names:
        if name in METHOD_DESCRIPTIONS:
            available.append({"name": name, **METHOD_DESCRIPTIONS[name]})
        else:
            unavailable.append(name)
    result: Dict[str, Any] = {"total_methods": len(available), "methods": available}
    if unavailable:
        result["warning"] = f"Requested methods not found in registry: {unavailable}"
    return json.dumps(result, indent=2)


def validate_method_params(name: str, params: MethodParams) -> Dict[str, Any]:
    """
    Check a method name and list the explicitly set parameters it ignores.

    Returns:
        Dictionary with validation results:
        - valid: bool (True if the method exists)
        - ignored_params: parameters set in the scenario that the method does not read
        - used_params: parameters the method reads

    Example:
        >>> validate_method_params("hyperband", MethodParams(k=4))["ignored_params"]
        ['k']
    """
    if name not in METHOD_DESCRIPTIONS:
        return {"method": name, "valid": False, "ignored_params": [], "used_params": []}
    used = METHOD_DESCRIPTIONS[name]["params"]
    explicit = sorted(params.model_fields_set - {"delta_m"})
    return {
        "method": name,
        "valid": True,
        "ignored_params": [p for p in explicit if p not in used],
        "used_params": list(used),
    }


# List of all method names (for quick reference)
ALL_METHOD_NAMES = sorted(METHOD_REGISTRY.keys())

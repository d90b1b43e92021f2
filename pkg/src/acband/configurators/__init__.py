from acband.configurators.acband import epoch_schedule, n_alpha_delta, run_acband
from acband.configurators.cse import (
    RHO_PRESETS,
    arm_elimination,
    cse_schedule,
    f_rho,
    partition_configs,
    rho_for_variant,
    run_cse,
)
from acband.configurators.hyperband import hb_plan, run_hyperband
from acband.configurators.registry import METHOD_REGISTRY, get_method, validate_method_params

__all__ = [
    "METHOD_REGISTRY",
    "RHO_PRESETS",
    "arm_elimination",
    "cse_schedule",
    "epoch_schedule",
    "f_rho",
    "get_method",
    "hb_plan",
    "n_alpha_delta",
    "partition_configs",
    "rho_for_variant",
    "run_acband",
    "run_cse",
    "run_hyperband",
    "validate_method_params",
]

"""
Error taxonomy for acband.

Every error carries the CLI exit code it maps to:
- 2: configuration problems (bad parameters, infeasible requests)
- 3: data problems (unreadable matrices, exhausted pools, runner failures)
- 4: the instance budget cannot cover the schedule
"""

from __future__ import annotations


class ACBandError(Exception):
    """Base class for all acband errors."""

    exit_code: int = 1


# Configuration errors (exit 2)

class ConfigError(ACBandError, ValueError):
    exit_code = 2


class InvalidParameter(ConfigError):
    pass


class InvalidN0(ConfigError):
    pass


class InfeasibleAlpha(ConfigError):
    pass


class RhoOutOfRange(ConfigError):
    pass


class BudgetTooSmall(ConfigError):
    pass


# Data errors (exit 3)

class DataError(ACBandError):
    exit_code = 3


class MalformedFile(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class NonPositiveRuntime(DataError):
    pass


class IndexOutOfRange(DataError, IndexError):
    pass


class InstanceReuse(DataError):
    """An instance was handed to a second group evaluation within one run."""


class PoolExhausted(DataError):
    pass


class SpawnFailure(DataError):
    pass


class ConfigNotInSubset(DataError):
    pass


class MissingGapData(DataError):
    pass


# Budget errors (exit 4)

class InsufficientBudget(ACBandError):
    exit_code = 4

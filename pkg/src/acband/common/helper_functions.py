from __future__ import annotations

from typing import Any, Iterable, Optional

import numpy as np
from pydantic import ValidationError

from acband.common.errors import ACBandError
from acband.common.models import ConfigId
from acband.common.rng import SeededRng


def rank_with_ties(scores: Iterable[tuple[ConfigId, float]], rng: SeededRng) -> list[ConfigId]:
    """Order ids by descending score, permuting tied ids uniformly at random.

    Args:
        scores: (id, score) pairs with finite scores
        rng: stream that decides the order inside every block of equal scores

    Returns:
        A permutation of the input ids

    Example:
        >>> rank_with_ties([(0, 1.0), (1, 1.0), (2, 0.0)], SeededRng(7))[-1]
        2
    """
    pairs = list(scores)
    if not pairs:
        return []
    ids = [cid for cid, _ in pairs]
    values = np.array([score for _, score in pairs], dtype=float)
    jitter = rng.random(len(pairs))
    # lexsort keys: last is primary
    order = np.lexsort((jitter, -values))
    return [ids[i] for i in order]


def handle_run_error(error: Exception, *, context: Optional[str] = None) -> dict[str, Any]:
    """Turn an exception into a failure payload with the exit code it maps to."""
    if isinstance(error, ACBandError):
        exit_code = error.exit_code
    elif isinstance(error, ValidationError):
        exit_code = 2
    elif isinstance(error, (FileNotFoundError, IsADirectoryError, PermissionError)):
        exit_code = 3
    else:
        exit_code = 1
    where = f" while {context}" if context else ""
    return {
        "error": str(error),
        "kind": type(error).__name__,
        "message": f"{type(error).__name__}{where}: {error}",
        "exit_code": exit_code,
        "success": False,
    }

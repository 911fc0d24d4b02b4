"""Input validation helpers in the style of ``sklearn.utils.validation``."""
from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np

from .exceptions import CopolyError, DimensionError, OutOfRange
from .model import RateSet, validate_rates
from .simulator import Trajectory


def check_rates(k_plus, k_minus=None) -> RateSet:
    """Accept a :class:`RateSet` or two raw sequences; always return a RateSet."""
    if isinstance(k_plus, RateSet):
        if k_minus is not None:
            raise CopolyError("pass either a RateSet or two rate vectors, not both")
        return k_plus
    if k_minus is None:
        raise CopolyError("k_minus is required")
    return validate_rates(np.ravel(k_plus), np.ravel(k_minus))


def check_trajectories(X, d: Optional[int] = None) -> list:
    """Normalise a trajectory or iterable of trajectories into a non-empty list."""
    if isinstance(X, Trajectory):
        X = [X]
    try:
        trajs = list(X)
    except TypeError:
        raise CopolyError("expected a Trajectory or an iterable of trajectories") from None
    if not trajs:
        raise CopolyError("at least one trajectory is required")
    for tr in trajs:
        if not isinstance(tr, Trajectory):
            raise CopolyError(f"expected Trajectory, got {type(tr).__name__}")
    dims = {tr.d for tr in trajs}
    if len(dims) != 1:
        raise DimensionError("trajectories have different numbers of monomer types")
    if d is not None and dims != {d}:
        raise DimensionError(f"expected d = {d}, trajectories have d = {dims.pop()}")
    return trajs


def check_sample_times(times: Iterable[float], horizon: Optional[float] = None) -> np.ndarray:
    """1-d, finite, non-decreasing and within ``[0, horizon]``."""
    t = np.asarray(list(times) if not isinstance(times, np.ndarray) else times, dtype=float)
    if t.ndim != 1:
        raise OutOfRange("sample times must be one-dimensional")
    if not np.all(np.isfinite(t)):
        raise OutOfRange("sample times must be finite")
    if t.size > 1 and np.any(np.diff(t) < 0):
        raise OutOfRange("sample times must be non-decreasing")
    if t.size and (t[0] < 0 or (horizon is not None and t[-1] > horizon)):
        raise OutOfRange(f"sample times must lie in [0, {horizon}]")
    return t


def check_probability_vector(p: Sequence[float], atol: float = 1e-10) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or np.any(p < 0) or abs(p.sum() - 1.0) > atol:
        raise CopolyError("not a probability vector")
    return p

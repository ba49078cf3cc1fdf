"""Input checks shared by the estimators and the CLI."""
from __future__ import annotations

import numbers
import os

from .exceptions import InvalidBinCount, UsageError
from .tensor_store import Checkpoint, read_checkpoint


def check_checkpoint(X) -> Checkpoint:
    """Accept a Checkpoint or a path to a container file."""
    if isinstance(X, Checkpoint):
        return X
    if isinstance(X, (str, os.PathLike)):
        return read_checkpoint(X)
    raise TypeError(f"expected a Checkpoint or a path, got {type(X).__name__}")


def check_ratio(ratio) -> float:
    if isinstance(ratio, bool) or not isinstance(ratio, numbers.Real) or not 0 < ratio < 1:
        raise UsageError(f"ratio must be a real number in (0, 1), got {ratio!r}")
    return float(ratio)


def check_n_bins(n_bins) -> int:
    if isinstance(n_bins, bool) or not isinstance(n_bins, numbers.Integral) or n_bins < 1:
        raise InvalidBinCount(f"n_bins must be a positive integer, got {n_bins!r}")
    return int(n_bins)


def check_count(count) -> int:
    if isinstance(count, bool) or not isinstance(count, numbers.Integral) or count < 1:
        raise UsageError(f"count must be a positive integer, got {count!r}")
    return int(count)

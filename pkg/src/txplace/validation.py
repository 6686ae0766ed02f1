"""Input validation helpers and the package's exception types."""

from __future__ import annotations

import numpy as np


class InvalidArgumentError(ValueError):
    """Raised when a caller passes arguments outside an operation's contract."""


class DegenerateMapError(ValueError):
    """Raised when a reference optimum is zero or negative, so percents are undefined."""


class FormatError(ValueError):
    """Raised when a file on disk does not parse as the expected format."""


def check_positive_int(value, name, minimum=1):
    if isinstance(value, (bool, np.bool_)) or not isinstance(value, (int, np.integer)):
        raise InvalidArgumentError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise InvalidArgumentError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_count_in_range(value, name, upper):
    value = check_positive_int(value, name)
    if value > upper:
        raise InvalidArgumentError(f"{name} must be in [1, {upper}], got {value}")
    return value


def check_scores(values, region):
    """Return ``values`` as a 1-D float array aligned with ``region``."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidArgumentError(f"score values must be 1-D, got shape {arr.shape}")
    if arr.shape[0] != region.size:
        raise InvalidArgumentError(
            f"score values have length {arr.shape[0]}, region has {region.size} members"
        )
    if region.size == 0:
        raise InvalidArgumentError("feasible region is empty")
    return arr


def check_same_region(a, b):
    if a != b:
        raise InvalidArgumentError("score maps are defined over different feasible regions")

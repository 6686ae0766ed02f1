"""Scalar objectives over the feasible region, percent normalization, and distances."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass

import numpy as np

from .validation import DegenerateMapError, InvalidArgumentError


@dataclass(frozen=True)
class ObjectivePair:
    avg_power: float
    avg_coverage: float


@dataclass(frozen=True)
class PercentPair:
    pwr_pct: float
    cov_pct: float

    @property
    def d(self):
        return instance_l2(self.cov_pct, self.pwr_pct)


def _region_values(rm, region):
    if region.size == 0:
        raise InvalidArgumentError("feasible region is empty")
    values = rm.values if hasattr(rm, "values") else np.asarray(rm)
    return np.asarray(values).ravel()[region.flat_index]


def avg_power(rm, region):
    """Mean pixel value over the region, summed left to right in raster order."""
    v = _region_values(rm, region)
    return float(np.cumsum(v)[-1]) / v.shape[0]


def avg_coverage(rm, region):
    """Fraction of region members strictly above the detection floor."""
    v = _region_values(rm, region)
    return int(np.count_nonzero(v > 0.0)) / v.shape[0]


def objective_pair(rm, region):
    return ObjectivePair(avg_power(rm, region), avg_coverage(rm, region))


def percent_of(value, optimum):
    if not optimum > 0:
        raise DegenerateMapError(f"reference optimum must be positive, got {optimum}")
    # ratio first, so the optimum itself scores exactly 100
    return value / optimum * 100.0


def percent_pair(pair, power_opt_value, cov_opt_value):
    return PercentPair(
        pwr_pct=percent_of(pair.avg_power, power_opt_value),
        cov_pct=percent_of(pair.avg_coverage, cov_opt_value),
    )


def instance_l2(cov_pct, pwr_pct):
    """Distance of one (coverage %, power %) point from the ideal (100, 100)."""
    dc = 100.0 - cov_pct
    dp = 100.0 - pwr_pct
    return math.sqrt(dc * dc + dp * dp)


def dataset_l2(mean_cov_pct, mean_pwr_pct):
    """Distance of the *mean* point from (100, 100).

    This is not the mean of per-instance distances; by convexity it is never
    larger than that mean.
    """
    return instance_l2(mean_cov_pct, mean_pwr_pct)


def coord_error(a, b):
    dy = a.y - b.y
    dx = a.x - b.x
    return math.sqrt(dy * dy + dx * dx)


def mean_std(values):
    """Mean and sample (n-1) standard deviation; std is 0 for a single value."""
    vals = [float(v) for v in values]
    if not vals:
        raise InvalidArgumentError("cannot summarize an empty sequence")
    # statistics works in exact arithmetic, so a constant column has std exactly 0
    std = statistics.stdev(vals) if len(vals) > 1 else 0.0
    return statistics.fmean(vals), std

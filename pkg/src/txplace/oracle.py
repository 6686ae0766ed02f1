"""Exhaustive labeling: score maps over every feasible placement and the dual optima."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .grid import Placement, feasible_region
from .ledger import DEFAULT_BATCH_SIZE, EvalLedger
from .objectives import (
    coord_error,
    dataset_l2,
    instance_l2,
    mean_std,
    objective_pair,
    percent_of,
)
from .propagation import evaluate_batch, get_evaluator
from .validation import InvalidArgumentError, check_same_region

POWER = "power"
COVERAGE = "coverage"


@dataclass(frozen=True, eq=False)
class ScoreMap:
    """One objective value per feasible member, in the region's raster order."""

    objective: str
    region: object
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.objective not in (POWER, COVERAGE):
            raise InvalidArgumentError(f"unknown objective {self.objective!r}")
        values = np.array(self.values, dtype=np.float64, copy=True).ravel()
        if values.shape[0] != self.region.size:
            raise InvalidArgumentError(
                f"{values.shape[0]} scores for a region of {self.region.size} members"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def min_val(self):
        return float(self.values.min())

    @property
    def max_val(self):
        return float(self.values.max())

    def __len__(self):
        return self.values.shape[0]

    def to_grid(self, fill=np.nan):
        """Scatter the scores back onto the full building grid."""
        grid = np.full((self.region.height, self.region.width), fill, dtype=np.float64)
        grid[self.region.members[:, 0], self.region.members[:, 1]] = self.values
        return grid


@dataclass(frozen=True, eq=False)
class NormalizedScoreMap:
    objective: str
    region: object
    values: np.ndarray = field(repr=False)
    min_val: float
    max_val: float

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True).ravel()
        if values.shape[0] != self.region.size:
            raise InvalidArgumentError(
                f"{values.shape[0]} scores for a region of {self.region.size} members"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


def normalize(sm):
    """Min-max scale to [0, 1]; a constant map becomes all zeros."""
    lo, hi = sm.min_val, sm.max_val
    if hi > lo:
        values = (sm.values - lo) / (hi - lo)
    else:
        values = np.zeros_like(sm.values)
    return NormalizedScoreMap(sm.objective, sm.region, values, lo, hi)


def denormalize(nsm):
    values = nsm.values * (nsm.max_val - nsm.min_val) + nsm.min_val
    return ScoreMap(nsm.objective, nsm.region, values)


@dataclass(frozen=True)
class DualOptimum:
    power_opt: Placement
    power_opt_value: float
    cov_opt: Placement
    cov_opt_value: float
    balanced_opt: Placement
    balanced_d: float
    balanced_cov_pct: float
    balanced_pwr_pct: float
    cov_pct_at_power_opt: float
    pwr_pct_at_cov_opt: float

    @property
    def optimum_distance(self):
        """Pixel distance between the power- and coverage-optimal placements."""
        return coord_error(self.power_opt, self.cov_opt)


def _chunks(seq, size):
    return [seq[i : i + size] for i in range(0, len(seq), size)]


def exhaustive_score_maps(
    bmap,
    region,
    model="wall_count",
    params=None,
    ledger=None,
    batch_size=DEFAULT_BATCH_SIZE,
    n_jobs=1,
):
    """Place the transmitter at every region member and score both objectives.

    Scores land in slots indexed by raster position, so any ``n_jobs`` gives
    bit-identical maps.
    """
    if region.size == 0:
        raise InvalidArgumentError(f"map {bmap.id!r}: feasible region is empty")
    evaluator = get_evaluator(model, params)
    if ledger is None:
        ledger = EvalLedger(batch_size)
    power = np.empty(region.size, dtype=np.float64)
    coverage = np.empty(region.size, dtype=np.float64)
    placements = region.placements()
    starts = range(0, region.size, batch_size)

    def run(start):
        batch = placements[start : start + batch_size]
        maps = evaluate_batch(bmap, batch, model=evaluator, ledger=ledger, batch_size=batch_size)
        for offset, rm in enumerate(maps):
            pair = objective_pair(rm, region)
            power[start + offset] = pair.avg_power
            coverage[start + offset] = pair.avg_coverage

    if n_jobs == 1:
        for s in starts:
            run(s)
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            list(pool.map(run, starts))
    return ScoreMap(POWER, region, power), ScoreMap(COVERAGE, region, coverage)


def coverage_argmax(cov_values, pwr_values):
    """Index of the best coverage; ties go to higher power, then raster order."""
    best = cov_values.max()
    tied = np.flatnonzero(cov_values == best)
    return int(tied[np.argmax(pwr_values[tied])])


def dual_optima(pwr, cov):
    check_same_region(pwr.region, cov.region)
    if pwr.objective != POWER or cov.objective != COVERAGE:
        raise InvalidArgumentError("dual_optima expects (power, coverage) score maps")
    region = pwr.region
    ip = int(np.argmax(pwr.values))  # first maximum, i.e. raster-first
    ic = coverage_argmax(cov.values, pwr.values)
    p_opt = float(pwr.values[ip])
    c_opt = float(cov.values[ic])

    best_i, best_d = 0, np.inf
    best_pct = (0.0, 0.0)
    for i in range(region.size):
        cov_pct = percent_of(float(cov.values[i]), c_opt)
        pwr_pct = percent_of(float(pwr.values[i]), p_opt)
        d = instance_l2(cov_pct, pwr_pct)
        if d < best_d:
            best_i, best_d, best_pct = i, d, (cov_pct, pwr_pct)

    return DualOptimum(
        power_opt=region.placement(ip),
        power_opt_value=p_opt,
        cov_opt=region.placement(ic),
        cov_opt_value=c_opt,
        balanced_opt=region.placement(best_i),
        balanced_d=best_d,
        balanced_cov_pct=best_pct[0],
        balanced_pwr_pct=best_pct[1],
        cov_pct_at_power_opt=percent_of(float(cov.values[ip]), c_opt),
        pwr_pct_at_cov_opt=percent_of(float(pwr.values[ic]), p_opt),
    )


@dataclass(eq=False)
class LabeledScenario:
    bmap: object
    region: object
    power: ScoreMap
    coverage: ScoreMap
    optimum: DualOptimum
    ledger: EvalLedger

    @property
    def id(self):
        return self.bmap.id


def label_map(bmap, margin, model="wall_count", params=None, batch_size=DEFAULT_BATCH_SIZE, n_jobs=1):
    region = feasible_region(bmap, margin)
    ledger = EvalLedger(batch_size)
    with ledger.phase("labeling"):
        pwr, cov = exhaustive_score_maps(
            bmap, region, model, params, ledger=ledger, batch_size=batch_size, n_jobs=n_jobs
        )
    return LabeledScenario(bmap, region, pwr, cov, dual_optima(pwr, cov), ledger)


@dataclass(frozen=True)
class BoundsSummary:
    n: int
    cov_at_power_opt: tuple
    pwr_at_cov_opt: tuple
    balanced_cov: tuple
    balanced_pwr: tuple
    optimum_distance: tuple
    d_power_opt: float
    d_cov_opt: float
    d_balanced: float


def bounds_report(optima):
    """Corpus-level trade-off summary; each field is ``(mean, std)`` or a distance."""
    optima = list(optima)
    if not optima:
        raise InvalidArgumentError("bounds_report needs at least one labeled map")
    cov_at_p = mean_std([o.cov_pct_at_power_opt for o in optima])
    pwr_at_c = mean_std([o.pwr_pct_at_cov_opt for o in optima])
    bal_cov = mean_std([o.balanced_cov_pct for o in optima])
    bal_pwr = mean_std([o.balanced_pwr_pct for o in optima])
    return BoundsSummary(
        n=len(optima),
        cov_at_power_opt=cov_at_p,
        pwr_at_cov_opt=pwr_at_c,
        balanced_cov=bal_cov,
        balanced_pwr=bal_pwr,
        optimum_distance=mean_std([o.optimum_distance for o in optima]),
        d_power_opt=dataset_l2(cov_at_p[0], 100.0),
        d_cov_opt=dataset_l2(100.0, pwr_at_c[0]),
        d_balanced=dataset_l2(bal_cov[0], bal_pwr[0]),
    )

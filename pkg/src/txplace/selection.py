"""Candidate pools and selection rules.

Pools are built from score values aligned with a :class:`FeasibleRegion`
(oracle scores, file predictions, or anything else with that shape). Every
ranking breaks ties by raster order, so the results are fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Placement
from .ledger import DEFAULT_BATCH_SIZE, EvalLedger, n_batches
from .objectives import coord_error, instance_l2, objective_pair, percent_pair
from .oracle import coverage_argmax
from .propagation import evaluate_batch, get_evaluator
from .validation import InvalidArgumentError, check_count_in_range, check_positive_int, check_scores

PROVENANCES = ("topk_power", "topk_coverage", "minimax", "union", "samples", "custom")
STRATEGIES = ("best_power", "best_coverage", "best_l2")


@dataclass(frozen=True, eq=False)
class CandidatePool:
    region: object
    indices: np.ndarray = field(repr=False)
    provenance: str = "custom"
    params: dict = field(default_factory=dict)
    shortfall: bool = False

    def __post_init__(self):
        idx = np.array(self.indices, dtype=np.int64, copy=True).ravel()
        if np.unique(idx).size != idx.size:
            raise InvalidArgumentError("candidate pool contains duplicate placements")
        if idx.size and (idx.min() < 0 or idx.max() >= self.region.size):
            raise InvalidArgumentError("candidate pool index outside the feasible region")
        if self.provenance not in PROVENANCES:
            raise InvalidArgumentError(f"unknown provenance {self.provenance!r}")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    @property
    def placements(self):
        return [self.region.placement(int(i)) for i in self.indices]

    def __len__(self):
        return self.indices.shape[0]

    @classmethod
    def from_placements(cls, region, placements, provenance="custom", **params):
        return cls(region, [region.index_of(p) for p in placements], provenance, params)


@dataclass(frozen=True)
class RankPair:
    r_pwr: int
    r_cov: int

    @property
    def r_max(self):
        return max(self.r_pwr, self.r_cov)


def descending_order(values):
    """Indices sorted by decreasing value; equal values keep raster order."""
    return np.argsort(-np.asarray(values, dtype=np.float64), kind="stable")


def ranks(values):
    """1-based unique ranks under :func:`descending_order`."""
    order = descending_order(values)
    r = np.empty(order.shape[0], dtype=np.int64)
    r[order] = np.arange(1, order.shape[0] + 1)
    return r


def argmax_placement(values, region):
    values = check_scores(values, region)
    return region.placement(int(np.argmax(values)))


def topk(values, region, k, provenance="topk_power"):
    values = check_scores(values, region)
    k = check_count_in_range(k, "K", region.size)
    return CandidatePool(region, descending_order(values)[:k], provenance, {"K": k})


def minimax_order(pwr_values, cov_values):
    """Members sorted by max(power rank, coverage rank), raster order on ties."""
    r_max = np.maximum(ranks(pwr_values), ranks(cov_values))
    return np.lexsort((np.arange(r_max.shape[0]), r_max)), r_max


def minimax_pool(pwr_values, cov_values, region, k):
    pwr_values = check_scores(pwr_values, region)
    cov_values = check_scores(cov_values, region)
    k = check_count_in_range(k, "K", region.size)
    order, _ = minimax_order(pwr_values, cov_values)
    return CandidatePool(region, order[:k], "minimax", {"K": k})


def union_pool(pwr_values, cov_values, region, m):
    """Top-M of each map merged, power list first; returns ``(pool, overlap %)``."""
    pwr_values = check_scores(pwr_values, region)
    cov_values = check_scores(cov_values, region)
    m = check_count_in_range(m, "M", region.size)
    top_p = descending_order(pwr_values)[:m]
    top_c = descending_order(cov_values)[:m]
    seen = set(top_p.tolist())
    merged = top_p.tolist() + [i for i in top_c.tolist() if i not in seen]
    overlap = (2 * m - len(merged)) / m * 100.0
    return CandidatePool(region, merged, "union", {"M": m}), overlap


def sample_pool(region, seed, n, scores=None, sigma=2.0, max_attempts_per_member=32):
    """Jittered draws around the score argmax, emulating a stochastic sampler.

    Draws come from one seeded stream consumed in fixed-size chunks, so the
    pool for ``n`` is always a prefix of the pool for ``n + 1``. Draws landing
    outside the region or on an already-drawn member are rejected. Once the
    attempt budget (a function of the region only) runs out, the remaining
    members are appended nearest-to-centre first, raster order on ties.
    """
    n = check_positive_int(n, "N")
    if region.size == 0:
        raise InvalidArgumentError("feasible region is empty")
    if scores is None:
        centre_idx = _nearest_member(region, (region.height - 1) / 2.0, (region.width - 1) / 2.0)
    else:
        centre_idx = int(np.argmax(check_scores(scores, region)))
    cy, cx = region.members[centre_idx]
    lookup = np.full((region.height, region.width), -1, dtype=np.int64)
    lookup[region.members[:, 0], region.members[:, 1]] = np.arange(region.size)

    target = min(n, region.size)
    rng = np.random.default_rng(seed)
    budget = max_attempts_per_member * region.size
    chosen, seen = [], set()
    attempts = 0
    chunk = 256
    while len(chosen) < target and attempts < budget:
        offsets = np.rint(rng.normal(0.0, sigma, size=(chunk, 2))).astype(np.int64)
        for dy, dx in offsets:
            attempts += 1
            y, x = cy + dy, cx + dx
            if 0 <= y < region.height and 0 <= x < region.width:
                i = int(lookup[y, x])
                if i >= 0 and i not in seen:
                    seen.add(i)
                    chosen.append(i)
                    if len(chosen) == target:
                        break
            if attempts >= budget:
                break
    if len(chosen) < target:
        d2 = (region.members[:, 0] - cy) ** 2 + (region.members[:, 1] - cx) ** 2
        for i in np.lexsort((np.arange(region.size), d2)).tolist():
            if i not in seen:
                seen.add(i)
                chosen.append(i)
                if len(chosen) == target:
                    break
    return CandidatePool(
        region, chosen, "samples", {"N": n, "seed": seed, "sigma": sigma}, shortfall=n > region.size
    )


def _nearest_member(region, y, x):
    d2 = (region.members[:, 0] - y) ** 2 + (region.members[:, 1] - x) ** 2
    return int(np.argmin(d2))


@dataclass(frozen=True)
class SelectionOutcome:
    chosen: Placement
    pwr_pct: float
    cov_pct: float
    d_n: float
    err_pwr: float
    err_cov: float
    evals_used: int
    batches_used: int


@dataclass(frozen=True)
class ReferenceOptima:
    """The per-map optimum values and placements that percents are measured against."""

    power_opt: Placement
    power_opt_value: float
    cov_opt: Placement
    cov_opt_value: float

    @classmethod
    def from_dual(cls, opt):
        return cls(opt.power_opt, opt.power_opt_value, opt.cov_opt, opt.cov_opt_value)


def select(
    pool,
    bmap,
    region,
    reference,
    strategy="best_l2",
    model="wall_count",
    params=None,
    ledger=None,
    batch_size=DEFAULT_BATCH_SIZE,
):
    """Re-evaluate every pool member and keep the best under ``strategy``.

    ``best_coverage`` breaks coverage ties by higher power, matching the
    oracle's coverage optimum; everything else ties to the raster-first member.
    """
    if strategy not in STRATEGIES:
        raise InvalidArgumentError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    if len(pool) == 0:
        raise InvalidArgumentError("cannot select from an empty pool")
    if pool.region != region:
        raise InvalidArgumentError("pool was built over a different feasible region")
    if not hasattr(reference, "power_opt_value"):
        raise InvalidArgumentError("reference optima are required to compute percents")
    if ledger is None:
        ledger = EvalLedger(batch_size)
    evaluator = get_evaluator(model, params)

    idx = np.sort(pool.indices)  # raster order, so first-wins ties are raster-first
    with ledger.phase("evaluation"):
        maps = evaluate_batch(
            bmap, [region.placement(int(i)) for i in idx], model=evaluator, ledger=ledger,
            batch_size=batch_size,
        )
    pairs = [objective_pair(rm, region) for rm in maps]
    pcts = [percent_pair(p, reference.power_opt_value, reference.cov_opt_value) for p in pairs]

    if strategy == "best_power":
        k = int(np.argmax([p.avg_power for p in pairs]))
    elif strategy == "best_coverage":
        k = coverage_argmax(
            np.array([p.avg_coverage for p in pairs]), np.array([p.avg_power for p in pairs])
        )
    else:
        dists = [instance_l2(p.cov_pct, p.pwr_pct) for p in pcts]
        k = int(np.argmin(dists))

    chosen = region.placement(int(idx[k]))
    pct = pcts[k]
    return SelectionOutcome(
        chosen=chosen,
        pwr_pct=pct.pwr_pct,
        cov_pct=pct.cov_pct,
        d_n=instance_l2(pct.cov_pct, pct.pwr_pct),
        err_pwr=coord_error(chosen, reference.power_opt),
        err_cov=coord_error(chosen, reference.cov_opt),
        evals_used=len(idx),
        batches_used=n_batches(len(idx), batch_size),
    )

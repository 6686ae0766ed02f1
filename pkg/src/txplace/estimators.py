"""scikit-learn style wrappers around the labeling and selection pipeline.

These make the pipeline stages usable with ``get_params``/``set_params``,
``clone`` and grid-search style sweeps::

    labeler = ScoreMapLabeler(margin=8).fit(maps)
    scenarios = labeler.transform(maps)
    sel = PlacementSelector(pool="union", param=16, strategy="best_l2")
    outcomes = sel.fit(scenarios).predict(scenarios)
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .grid import BuildingMap
from .ledger import DEFAULT_BATCH_SIZE, EvalLedger
from .oracle import label_map
from .propagation import PropagationParams, get_evaluator
from .selection import (
    STRATEGIES,
    ReferenceOptima,
    minimax_pool,
    sample_pool,
    select,
    topk,
    union_pool,
)
from .validation import InvalidArgumentError

POOLS = ("topk_power", "topk_coverage", "minimax", "union", "samples")
DEFAULT_RULE = {
    "topk_power": "best_power",
    "topk_coverage": "best_coverage",
    "minimax": "best_l2",
    "union": "best_l2",
    "samples": "best_l2",
}


class ScoreMapLabeler(TransformerMixin, BaseEstimator):
    """Exhaustively label building maps with both score maps and their optima.

    ``transform`` returns one :class:`~txplace.oracle.LabeledScenario` per
    input map; ``ledger_`` accumulates evaluator calls over every transform.
    """

    def __init__(self, margin=8, model="wall_count", params=None, batch_size=DEFAULT_BATCH_SIZE, n_jobs=1):
        self.margin = margin
        self.model = model
        self.params = params
        self.batch_size = batch_size
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        if self.params is not None and not isinstance(self.params, PropagationParams):
            raise InvalidArgumentError("params must be a PropagationParams instance")
        if self.batch_size < 1 or self.n_jobs < 1:
            raise InvalidArgumentError("batch_size and n_jobs must be positive")
        self.evaluator_ = get_evaluator(self.model, self.params)
        self.ledger_ = EvalLedger(self.batch_size)
        return self

    def transform(self, X):
        check_is_fitted(self, "evaluator_")
        maps = [X] if isinstance(X, BuildingMap) else list(X)
        out = []
        for bmap in maps:
            if not isinstance(bmap, BuildingMap):
                raise InvalidArgumentError(f"expected BuildingMap, got {type(bmap).__name__}")
            scen = label_map(bmap, self.margin, self.evaluator_, None, self.batch_size, self.n_jobs)
            self.ledger_.merge(scen.ledger)
            out.append(scen)
        return out


class ScoreNormalizer(TransformerMixin, BaseEstimator):
    """Min-max scaling of one score vector, keeping the bounds for inversion.

    A constant vector scales to zeros, and ``inverse_transform`` restores the
    constant.
    """

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=np.float64).ravel()
        if X.size == 0:
            raise InvalidArgumentError("cannot fit on an empty score vector")
        self.min_val_ = float(X.min())
        self.max_val_ = float(X.max())
        return self

    def transform(self, X):
        check_is_fitted(self, "min_val_")
        X = np.asarray(X, dtype=np.float64)
        if self.max_val_ > self.min_val_:
            return (X - self.min_val_) / (self.max_val_ - self.min_val_)
        return np.zeros_like(X)

    def inverse_transform(self, X):
        check_is_fitted(self, "min_val_")
        return np.asarray(X, dtype=np.float64) * (self.max_val_ - self.min_val_) + self.min_val_


def _scores_of(scen):
    pwr = getattr(scen, "power_values", None)
    if pwr is None:
        return scen.power.values, scen.coverage.values
    return pwr, scen.coverage_values


def _reference_of(scen):
    ref = getattr(scen, "reference", None)
    return ref if ref is not None else ReferenceOptima.from_dual(scen.optimum)


def build_pool(pool, param, pwr_values, cov_values, region, seed=0, sigma=2.0):
    """Return ``(CandidatePool, overlap %)``; overlap is None except for union pools."""
    if pool == "topk_power":
        return topk(pwr_values, region, param, "topk_power"), None
    if pool == "topk_coverage":
        return topk(cov_values, region, param, "topk_coverage"), None
    if pool == "minimax":
        return minimax_pool(pwr_values, cov_values, region, param), None
    if pool == "union":
        return union_pool(pwr_values, cov_values, region, param)
    if pool == "samples":
        return sample_pool(region, seed, param, scores=pwr_values, sigma=sigma), None
    raise InvalidArgumentError(f"unknown pool {pool!r}; expected one of {POOLS}")


class PlacementSelector(BaseEstimator):
    """Shortlist candidates from score maps, re-evaluate them, keep the best.

    ``param`` is K for top-K and minimax pools, M for union pools and N for
    sample pools; ``None`` means the whole feasible region. Scenarios passed
    to :meth:`predict` need ``bmap``, ``region``, score values (either
    ``power``/``coverage`` score maps or ``power_values``/``coverage_values``)
    and reference optima (``reference`` or ``optimum``).
    """

    def __init__(
        self,
        pool="union",
        param=16,
        strategy=None,
        seed=0,
        sigma=2.0,
        model="wall_count",
        params=None,
        batch_size=DEFAULT_BATCH_SIZE,
    ):
        self.pool = pool
        self.param = param
        self.strategy = strategy
        self.seed = seed
        self.sigma = sigma
        self.model = model
        self.params = params
        self.batch_size = batch_size

    def fit(self, X=None, y=None):
        if self.pool not in POOLS:
            raise InvalidArgumentError(f"unknown pool {self.pool!r}; expected one of {POOLS}")
        rule = self.strategy or DEFAULT_RULE[self.pool]
        if rule not in STRATEGIES:
            raise InvalidArgumentError(f"unknown strategy {rule!r}; expected one of {STRATEGIES}")
        self.strategy_ = rule
        self.evaluator_ = get_evaluator(self.model, self.params)
        self.ledger_ = EvalLedger(self.batch_size)
        self.overlaps_ = []
        return self

    def predict_one(self, scen, seed=None):
        check_is_fitted(self, "strategy_")
        pwr, cov = _scores_of(scen)
        param = scen.region.size if self.param is None else self.param
        pool, overlap = build_pool(
            self.pool, param, pwr, cov, scen.region,
            seed=self.seed if seed is None else seed, sigma=self.sigma,
        )
        outcome = select(
            pool, scen.bmap, scen.region, _reference_of(scen), self.strategy_,
            model=self.evaluator_, ledger=self.ledger_, batch_size=self.batch_size,
        )
        self.overlaps_.append(overlap)
        return outcome, pool, overlap

    def predict(self, X):
        return [self.predict_one(scen)[0] for scen in X]

"""Exhaustive single-transmitter placement labeling and candidate selection on building grids."""

from .estimators import PlacementSelector, ScoreMapLabeler, ScoreNormalizer
from .grid import BuildingMap, FeasibleRegion, Placement, feasible_region, generate_building_map
from .ledger import EvalLedger
from .objectives import (
    avg_coverage,
    avg_power,
    coord_error,
    dataset_l2,
    instance_l2,
    percent_of,
)
from .oracle import (
    DualOptimum,
    NormalizedScoreMap,
    ScoreMap,
    bounds_report,
    denormalize,
    dual_optima,
    exhaustive_score_maps,
    label_map,
    normalize,
)
from .propagation import (
    PropagationParams,
    RadioMap,
    coverage_map,
    dbm_to_pixel,
    evaluate,
    evaluate_batch,
    pixel_to_dbm,
)
from .selection import (
    CandidatePool,
    SelectionOutcome,
    argmax_placement,
    minimax_pool,
    sample_pool,
    select,
    topk,
    union_pool,
)
from .validation import DegenerateMapError, FormatError, InvalidArgumentError

__version__ = "0.1.0"

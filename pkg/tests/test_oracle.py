import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reference_oracle import NaiveOracle
from txplace.grid import BuildingMap, FeasibleRegion, feasible_region, generate_building_map
from txplace.ledger import EvalLedger
from txplace.objectives import instance_l2, percent_of
from txplace.oracle import (
    ScoreMap,
    bounds_report,
    denormalize,
    dual_optima,
    exhaustive_score_maps,
    label_map,
    normalize,
)
from txplace.validation import InvalidArgumentError


def _region(n):
    return FeasibleRegion(8, 8, 0, [[i // 8, i % 8] for i in range(n)])


def _maps(pwr, cov):
    r = _region(len(pwr))
    return ScoreMap("power", r, pwr), ScoreMap("coverage", r, cov)


def test_single_member_region():
    bmap = BuildingMap.free(8, 8)
    region = FeasibleRegion(8, 8, 3, [[4, 4]])
    pwr, cov = exhaustive_score_maps(bmap, region)
    assert len(pwr) == len(cov) == 1
    opt = dual_optima(pwr, cov)
    assert opt.power_opt == opt.cov_opt == opt.balanced_opt == region.placement(0)


def test_free_map_power_peak_is_central():
    bmap = BuildingMap.free(8, 8)
    region = feasible_region(bmap, 1)
    pwr, _ = exhaustive_score_maps(bmap, region, model="free_space")
    naive = NaiveOracle(walls=False)
    _, ref_power, _, _ = naive.label(bmap.cells.tolist(), 1)
    assert pwr.values.tolist() == ref_power
    best = set(map(tuple, region.members[pwr.values == pwr.values.max()].tolist()))
    assert best <= {(3, 3), (3, 4), (4, 3), (4, 4)}


def test_repeat_is_bit_identical():
    bmap = generate_building_map(5, 16, 16, 0.3, (2, 4))
    region = feasible_region(bmap, 4)
    a = exhaustive_score_maps(bmap, region)
    b = exhaustive_score_maps(bmap, region, n_jobs=4, batch_size=7)
    for x, y in zip(a, b):
        assert x.values.tobytes() == y.values.tobytes()


def test_ledger_counts_one_call_per_member():
    bmap = generate_building_map(5, 32, 32, 0.25)
    ledger = EvalLedger()
    region = feasible_region(bmap, 8)
    exhaustive_score_maps(bmap, region, ledger=ledger)
    assert ledger.evaluator_calls == region.size
    assert ledger.batches == -(-region.size // 64)


def test_empty_region_rejected():
    bmap = BuildingMap(np.ones((8, 8), dtype=bool))
    with pytest.raises(InvalidArgumentError):
        exhaustive_score_maps(bmap, feasible_region(bmap, 2))


@pytest.mark.parametrize("seed", range(5))
def test_matches_naive_reference(seed):
    bmap = generate_building_map(seed, 16, 16, 0.3, (2, 4))
    scen = label_map(bmap, 4)
    members, pwr, cov, ref = NaiveOracle().label(bmap.cells.tolist(), 4)
    assert scen.region.members.tolist() == [list(m) for m in members]
    assert scen.power.values.tolist() == pwr
    assert scen.coverage.values.tolist() == cov
    assert tuple(scen.optimum.power_opt) == ref["power_opt"]
    assert tuple(scen.optimum.cov_opt) == ref["cov_opt"]
    assert tuple(scen.optimum.balanced_opt) == ref["balanced_opt"]
    assert scen.optimum.balanced_d == ref["balanced_d"]


def test_coverage_tie_prefers_power():
    opt = dual_optima(*_maps([10.0, 12.0], [0.5, 0.5]))
    assert opt.cov_opt == _region(2).placement(1)


def test_total_tie_is_raster_first():
    opt = dual_optima(*_maps([3.0, 3.0, 3.0], [0.2, 0.2, 0.2]))
    first = _region(3).placement(0)
    assert opt.power_opt == opt.cov_opt == opt.balanced_opt == first


def test_coincident_optima():
    opt = dual_optima(*_maps([1.0, 5.0, 2.0], [0.1, 0.9, 0.3]))
    assert opt.balanced_opt == opt.power_opt == opt.cov_opt
    assert opt.balanced_d == 0.0
    assert opt.cov_pct_at_power_opt == 100.0 and opt.pwr_pct_at_cov_opt == 100.0


def test_mismatched_regions():
    a = ScoreMap("power", _region(2), [1.0, 2.0])
    b = ScoreMap("coverage", _region(3), [1.0, 2.0, 3.0])
    with pytest.raises(InvalidArgumentError):
        dual_optima(a, b)


def test_balanced_is_minimal(small_corpus):
    for scen in small_corpus:
        o = scen.optimum
        d = [
            instance_l2(percent_of(c, o.cov_opt_value), percent_of(p, o.power_opt_value))
            for p, c in zip(scen.power.values, scen.coverage.values)
        ]
        assert min(d) == o.balanced_d
        assert o.power_opt_value == scen.power.max_val
        assert o.cov_opt_value == scen.coverage.max_val
        assert o.cov_pct_at_power_opt <= 100.0 and o.pwr_pct_at_cov_opt <= 100.0


def test_normalize_examples():
    r = _region(3)
    n = normalize(ScoreMap("power", r, [2.0, 4.0, 6.0]))
    assert n.values.tolist() == [0.0, 0.5, 1.0]
    assert (n.min_val, n.max_val) == (2.0, 6.0)
    assert denormalize(n).values.tolist() == [2.0, 4.0, 6.0]


def test_normalize_constant():
    n = normalize(ScoreMap("coverage", _region(2), [5.0, 5.0]))
    assert n.values.tolist() == [0.0, 0.0]
    assert n.min_val == n.max_val == 5.0
    assert denormalize(n).values.tolist() == [5.0, 5.0]


@settings(max_examples=60)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=40))
def test_normalize_roundtrip_and_argmax(vals):
    sm = ScoreMap("power", _region(len(vals)), vals)
    n = normalize(sm)
    assert np.allclose(denormalize(n).values, sm.values, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(sm.values).max()))
    if n.max_val > n.min_val:
        # scaling is monotone but may merge values closer than an ulp, so check the raw argmax
        assert n.values[np.argmax(sm.values)] == 1.0
        assert n.values.max() == 1.0 and n.values.min() == 0.0


def test_bounds_report_single_coincident():
    opt = dual_optima(*_maps([1.0, 5.0], [0.1, 0.9]))
    s = bounds_report([opt])
    assert s.cov_at_power_opt == (100.0, 0.0)
    assert s.pwr_at_cov_opt == (100.0, 0.0)
    assert s.d_balanced == 0.0 and s.optimum_distance == (0.0, 0.0)


def test_bounds_report_two_maps_hand_computed():
    # map A: power_opt member 0, cov_opt member 1; map B: coincident
    a = dual_optima(*_maps([10.0, 8.0], [0.5, 1.0]))
    b = dual_optima(*_maps([4.0, 2.0], [1.0, 0.5]))
    assert a.cov_pct_at_power_opt == 50.0 and a.pwr_pct_at_cov_opt == 80.0
    s = bounds_report([a, b])
    assert s.cov_at_power_opt[0] == 75.0
    assert s.pwr_at_cov_opt[0] == 90.0
    assert s.cov_at_power_opt[1] == pytest.approx(np.std([50, 100], ddof=1))
    assert s.optimum_distance[0] == pytest.approx(0.5)  # members (0,0) and (0,1) are 1 px apart
    with pytest.raises(InvalidArgumentError):
        bounds_report([])

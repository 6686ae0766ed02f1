import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reference_oracle import crossed_cells_bruteforce
from txplace.grid import BuildingMap, Placement, generate_building_map
from txplace.ledger import EvalLedger
from txplace.propagation import (
    FileModel,
    PropagationParams,
    RadioMap,
    coverage_map,
    crossed_cells,
    dbm_to_pixel,
    evaluate,
    evaluate_batch,
    pixel_to_dbm,
    supercover_cells,
)
from txplace.pgm import write_pgm
from txplace.validation import InvalidArgumentError


def test_pixel_to_dbm_band_edges():
    assert pixel_to_dbm(0) == -84.0
    assert pixel_to_dbm(255) == -24.0
    assert pixel_to_dbm(127.5) == -54.0


@pytest.mark.parametrize("p", [-0.1, 255.5, float("nan")])
def test_pixel_to_dbm_range(p):
    with pytest.raises(InvalidArgumentError):
        pixel_to_dbm(p)


@pytest.mark.parametrize("v,expected", [(-84, 0.0), (-24, 255.0), (-100, 0.0), (0, 255.0)])
def test_dbm_to_pixel(v, expected):
    assert dbm_to_pixel(v) == expected


@given(st.floats(-84.0, -24.0))
def test_conversion_roundtrip(v):
    back = pixel_to_dbm(dbm_to_pixel(v))
    assert math.isclose(back, v, rel_tol=1e-12, abs_tol=0.0)


@pytest.mark.parametrize("dy", range(-12, 13))
def test_supercover_matches_bruteforce(dy):
    for dx in range(-12, 13):
        assert sorted(crossed_cells(dy, dx)) == sorted(crossed_cells_bruteforce(dy, dx))


def test_supercover_endpoints_and_corners():
    cells = supercover_cells(0, 0, 2, 2)
    assert cells[0] == (0, 0) and cells[-1] == (2, 2)
    # exact diagonal touches both side cells at each corner
    assert set(cells) == {(0, 0), (0, 1), (1, 0), (1, 1), (1, 2), (2, 1), (2, 2)}


def test_free_space_value_at_tx():
    params = PropagationParams()
    bmap = BuildingMap.free(16, 16)
    rm = evaluate(bmap, Placement(5, 9), params, "free_space")
    assert rm.values[5, 9] == dbm_to_pixel(params.tx_power_dbm - params.ref_loss_db)


def test_models_agree_without_walls():
    bmap = BuildingMap.free(16, 16)
    a = evaluate(bmap, Placement(7, 3), model="free_space")
    b = evaluate(bmap, Placement(7, 3), model="wall_count")
    assert np.array_equal(a.values, b.values)


def test_single_wall_hand_trace():
    # tx (8,2) -> q (8,12): the horizontal segment crosses only (8,3)..(8,11); one of them is a wall
    cells = np.zeros((16, 16), dtype=bool)
    cells[8, 6] = True
    bmap = BuildingMap(cells)
    params = PropagationParams(ref_loss_db=30.0, pathloss_exponent=2.0)
    tx = Placement(8, 2)
    fs = evaluate(bmap, tx, params, "free_space").values[8, 12]
    wc = evaluate(bmap, tx, params, "wall_count").values[8, 12]
    # free space: 23 - 30 - 20*log10(10) = -27 dBm -> pixel 242.25, wall moves it to -42 dBm
    assert fs == pytest.approx(242.25, abs=1e-12)
    assert fs - wc == pytest.approx(15.0 * 255.0 / 60.0, abs=1e-12)
    # a target behind the wall column but off the segment is unaffected
    assert evaluate(bmap, tx, params, "wall_count").values[2, 12] == evaluate(
        bmap, tx, params, "free_space"
    ).values[2, 12]


def test_tx_is_maximum():
    bmap = generate_building_map(4, 24, 24, 0.3, (2, 5))
    free = np.argwhere(~bmap.cells)
    for y, x in free[::37]:
        for model in ("free_space", "wall_count"):
            rm = evaluate(bmap, Placement(int(y), int(x)), model=model)
            assert rm.values[y, x] == rm.values.max()
            assert rm.values.min() >= 0 and rm.values.max() <= 255


def test_radial_symmetry_free_space():
    bmap = BuildingMap.free(21, 21)
    v = evaluate(bmap, Placement(10, 10), model="free_space").values
    assert v[10, 15] == v[15, 10] == v[10, 5] == v[5, 10]
    assert v[13, 14] == v[14, 13] == v[7, 6]


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 1000), lo=st.floats(0, 20), hi=st.floats(0, 20))
def test_wall_loss_monotone(seed, lo, hi):
    lo, hi = sorted((lo, hi))
    bmap = generate_building_map(seed, 16, 16, 0.3, (1, 4))
    free = np.argwhere(~bmap.cells)
    tx = Placement(*map(int, free[len(free) // 2]))
    a = evaluate(bmap, tx, PropagationParams(wall_loss_db=lo), "wall_count").values
    b = evaluate(bmap, tx, PropagationParams(wall_loss_db=hi), "wall_count").values
    assert (b <= a).all()


def test_occupied_or_outside_tx_rejected():
    cells = np.zeros((8, 8), dtype=bool)
    cells[3, 3] = True
    bmap = BuildingMap(cells)
    with pytest.raises(InvalidArgumentError):
        evaluate(bmap, Placement(3, 3))
    with pytest.raises(InvalidArgumentError):
        evaluate(bmap, Placement(8, 0))


def test_evaluate_batch_contract():
    bmap = BuildingMap.free(8, 8)
    assert evaluate_batch(bmap, []) == []
    t = Placement(2, 5)
    (only,) = evaluate_batch(bmap, [t])
    assert np.array_equal(only.values, evaluate(bmap, t).values)


def test_evaluate_batch_ledger():
    bmap = BuildingMap.free(16, 16)
    txs = [Placement(y, x) for y in range(16) for x in range(16)][:130]
    ledger = EvalLedger(batch_size=64)
    evaluate_batch(bmap, txs, ledger=ledger)
    assert (ledger.evaluator_calls, ledger.batches) == (130, 3)


def test_evaluate_batch_names_bad_index():
    cells = np.zeros((8, 8), dtype=bool)
    cells[1, 1] = True
    with pytest.raises(InvalidArgumentError, match=r"txs\[2\]"):
        evaluate_batch(BuildingMap(cells), [Placement(0, 0), Placement(0, 1), Placement(1, 1)])


def test_coverage_map_threshold():
    v = np.zeros((4, 4))
    assert coverage_map(RadioMap(v, Placement(0, 0))).count() == 0
    assert coverage_map(RadioMap(v + 255, Placement(0, 0))).count() == 16
    v[1, 1] = 1e-9
    bits = coverage_map(RadioMap(v, Placement(0, 0))).bits
    assert bits[1, 1] and not bits[0, 0]


@given(st.lists(st.floats(0, 255), min_size=16, max_size=16), st.floats(0, 50))
def test_coverage_non_increasing_under_decrease(vals, delta):
    v = np.array(vals).reshape(4, 4)
    a = coverage_map(RadioMap(v, Placement(0, 0))).count()
    b = coverage_map(RadioMap(np.clip(v - delta, 0, 255), Placement(0, 0))).count()
    assert b <= a


def test_pgm_export_rounds_half_up():
    rm = RadioMap(np.array([[0.5, 1.49], [254.5, 2.5]]), Placement(0, 0))
    assert rm.to_uint8().tolist() == [[1, 1], [255, 3]]


def test_file_model(tmp_path):
    bmap = BuildingMap.free(8, 8, id="f")
    (tmp_path / "f").mkdir()
    img = np.arange(64, dtype=np.uint16).reshape(8, 8) * 1000
    write_pgm(tmp_path / "f" / "2_3.pgm", img, maxval=65535)
    rm = evaluate(bmap, Placement(2, 3), model=f"file:{tmp_path}")
    assert np.allclose(rm.values, img * 255.0 / 65535)
    with pytest.raises(InvalidArgumentError):
        FileModel(tmp_path)(bmap, Placement(0, 0))

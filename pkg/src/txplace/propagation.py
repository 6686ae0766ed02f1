"""Propagation evaluators: built-in reference path-loss models and file-backed maps.

Every evaluator maps a ``(BuildingMap, Placement)`` pair to a :class:`RadioMap`
holding real-valued pixel units in ``[0, 255]``, where 0 is the -84 dBm
detection floor and 255 is -24 dBm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .grid import Placement
from .ledger import n_batches
from .pgm import read_pgm
from .validation import InvalidArgumentError

FLOOR_DBM = -84.0
CEIL_DBM = -24.0
PIXEL_MAX = 255.0

MODELS = ("free_space", "wall_count")

# Offset tables above this many entries are not built; walls are then traced per target.
_TABLE_LIMIT = 40_000_000


def pixel_to_dbm(p):
    """Received power in dBm for pixel value ``p`` in ``[0, 255]``."""
    arr = np.asarray(p, dtype=np.float64)
    if np.any((arr < 0) | (arr > PIXEL_MAX)) or np.any(np.isnan(arr)):
        raise InvalidArgumentError(f"pixel value out of [0, 255]: {p!r}")
    out = 60.0 * arr / 255.0 - 84.0
    return float(out) if out.ndim == 0 else out


def dbm_to_pixel(v, floor_dbm=FLOOR_DBM, ceil_dbm=CEIL_DBM):
    """Inverse of :func:`pixel_to_dbm`, clamped to ``[0, 255]``."""
    arr = np.asarray(v, dtype=np.float64)
    out = np.clip((arr - floor_dbm) * 255.0 / (ceil_dbm - floor_dbm), 0.0, PIXEL_MAX)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PropagationParams:
    tx_power_dbm: float = 23.0
    floor_dbm: float = FLOOR_DBM
    ceil_dbm: float = CEIL_DBM
    pathloss_exponent: float = 3.0
    ref_loss_db: float = 40.0
    wall_loss_db: float = 15.0

    def __post_init__(self):
        if not self.floor_dbm < self.ceil_dbm:
            raise InvalidArgumentError("floor_dbm must be below ceil_dbm")
        if not self.pathloss_exponent > 0:
            raise InvalidArgumentError("pathloss_exponent must be positive")
        if not self.wall_loss_db >= 0:
            raise InvalidArgumentError("wall_loss_db must be non-negative")


@dataclass(frozen=True, eq=False)
class RadioMap:
    values: np.ndarray = field(repr=False)
    tx: Placement

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def height(self):
        return self.values.shape[0]

    @property
    def width(self):
        return self.values.shape[1]

    def to_uint8(self):
        """Round half-up to integers, for PGM export."""
        return np.floor(self.values + 0.5).clip(0, 255).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class CoverageMap:
    bits: np.ndarray = field(repr=False)
    tx: Placement

    def count(self):
        return int(self.bits.sum())


def coverage_map(rm):
    """1 where the received power is strictly above the detection floor."""
    bits = np.asarray(rm.values) > 0.0
    bits.setflags(write=False)
    return CoverageMap(bits, rm.tx)


def supercover_cells(y0, x0, y1, x1):
    """Every grid cell touched by the segment between two pixel centres.

    Integer-only walk that also emits both side cells when the segment
    passes exactly through a grid corner. Cells come out in walk order,
    starting at ``(y0, x0)`` and ending at ``(y1, x1)``.
    """
    cells = [(y0, x0)]
    ystep = 1 if y1 >= y0 else -1
    xstep = 1 if x1 >= x0 else -1
    dy, dx = abs(y1 - y0), abs(x1 - x0)
    ddy, ddx = 2 * dy, 2 * dx
    y, x = y0, x0
    if ddx >= ddy:
        error = prev = dx
        for _ in range(dx):
            x += xstep
            error += ddy
            if error > ddx:
                y += ystep
                error -= ddx
                if error + prev < ddx:
                    cells.append((y - ystep, x))
                elif error + prev > ddx:
                    cells.append((y, x - xstep))
                else:
                    cells.append((y - ystep, x))
                    cells.append((y, x - xstep))
            cells.append((y, x))
            prev = error
    else:
        error = prev = dy
        for _ in range(dy):
            y += ystep
            error += ddx
            if error > ddy:
                x += xstep
                error -= ddy
                if error + prev < ddy:
                    cells.append((y, x - xstep))
                elif error + prev > ddy:
                    cells.append((y - ystep, x))
                else:
                    cells.append((y, x - xstep))
                    cells.append((y - ystep, x))
            cells.append((y, x))
            prev = error
    return cells


def crossed_cells(dy, dx):
    """Supercover cells strictly between the endpoints, relative to the start."""
    return supercover_cells(0, 0, dy, dx)[1:-1] if (dy or dx) else []


@lru_cache(maxsize=8)
def _offset_tables(height, width):
    """Padded relative-cell tables indexed by flattened offset.

    Padding entries point at ``(0, 0)``, i.e. the transmitter cell, which is
    free by contract and so never adds a wall.
    """
    n_off = (2 * height - 1) * (2 * width - 1)
    longest = 3 * max(height, width)  # diagonal walks add two corner cells per step
    if n_off * longest > _TABLE_LIMIT:
        return None
    rel_y = np.zeros((n_off, longest), dtype=np.int32)
    rel_x = np.zeros((n_off, longest), dtype=np.int32)
    o = 0
    for dy in range(-(height - 1), height):
        for dx in range(-(width - 1), width):
            cells = crossed_cells(dy, dx)
            if cells:
                arr = np.asarray(cells, dtype=np.int32)
                rel_y[o, : len(cells)] = arr[:, 0]
                rel_x[o, : len(cells)] = arr[:, 1]
            o += 1
    rel_y.setflags(write=False)
    rel_x.setflags(write=False)
    return rel_y, rel_x


@lru_cache(maxsize=32)
def _distance_loss_table(height, width, pathloss_exponent):
    """Distance term per flattened offset, 10*n*log10(max(d, 1))."""
    factor = 10.0 * pathloss_exponent
    by_d2 = {}
    out = np.empty((2 * height - 1) * (2 * width - 1), dtype=np.float64)
    o = 0
    for dy in range(-(height - 1), height):
        for dx in range(-(width - 1), width):
            d2 = dy * dy + dx * dx
            if d2 not in by_d2:
                by_d2[d2] = factor * math.log10(max(math.sqrt(d2), 1.0))
            out[o] = by_d2[d2]
            o += 1
    out.setflags(write=False)
    return out


def _offset_index(height, width, ty, tx):
    ys = np.arange(height)[:, None] - ty + (height - 1)
    xs = np.arange(width)[None, :] - tx + (width - 1)
    return ys * (2 * width - 1) + xs


def wall_counts(bmap, tx):
    """Occupied cells strictly crossed on the way from ``tx`` to every pixel."""
    h, w = bmap.shape
    occ = bmap.cells
    tables = _offset_tables(h, w)
    if tables is None:
        out = np.zeros((h, w), dtype=np.int64)
        for qy in range(h):
            for qx in range(w):
                out[qy, qx] = sum(
                    occ[tx.y + cy, tx.x + cx] for cy, cx in crossed_cells(qy - tx.y, qx - tx.x)
                )
        return out
    rel_y, rel_x = tables
    idx = _offset_index(h, w, tx.y, tx.x).ravel()
    hits = occ[tx.y + rel_y[idx], tx.x + rel_x[idx]]
    return hits.sum(axis=1).reshape(h, w)


class Evaluator:
    """Base class: ``evaluator(bmap, tx)`` returns the induced RadioMap."""

    name = "abstract"

    def __call__(self, bmap, tx):
        raise NotImplementedError

    def fingerprint(self):
        return self.name


class ReferenceModel(Evaluator):
    """Log-distance path loss, optionally with a fixed loss per wall crossing."""

    def __init__(self, name="wall_count", params=None):
        if name not in MODELS:
            raise InvalidArgumentError(f"unknown model {name!r}; expected one of {MODELS}")
        self.name = name
        self.params = params if params is not None else PropagationParams()

    def __call__(self, bmap, tx):
        _check_tx(bmap, tx)
        p = self.params
        h, w = bmap.shape
        idx = _offset_index(h, w, tx.y, tx.x)
        dbm = (p.tx_power_dbm - p.ref_loss_db) - _distance_loss_table(h, w, p.pathloss_exponent)[idx]
        if self.name == "wall_count":
            dbm = dbm - p.wall_loss_db * wall_counts(bmap, tx)
        values = np.clip((dbm - p.floor_dbm) * 255.0 / (p.ceil_dbm - p.floor_dbm), 0.0, PIXEL_MAX)
        return RadioMap(values, tx)

    def fingerprint(self):
        p = self.params
        return (
            f"{self.name};tx_power_dbm={p.tx_power_dbm!r};floor_dbm={p.floor_dbm!r};"
            f"ceil_dbm={p.ceil_dbm!r};pathloss_exponent={p.pathloss_exponent!r};"
            f"ref_loss_db={p.ref_loss_db!r};wall_loss_db={p.wall_loss_db!r}"
        )


class FileModel(Evaluator):
    """Precomputed radio maps read from ``<root>/<map id>/<y>_<x>.pgm``.

    8-bit maps are taken as pixel units directly; 16-bit maps are rescaled
    to ``[0, 255]``.
    """

    def __init__(self, root):
        self.root = Path(root)
        self.name = f"file:{root}"

    def path_for(self, bmap, tx):
        return self.root / bmap.id / f"{tx.y}_{tx.x}.pgm"

    def __call__(self, bmap, tx):
        _check_tx(bmap, tx)
        path = self.path_for(bmap, tx)
        if not path.exists():
            raise InvalidArgumentError(f"no precomputed radio map for {tx} at {path}")
        image, maxval = read_pgm(path)
        if image.shape != bmap.shape:
            raise InvalidArgumentError(
                f"{path}: radio map shape {image.shape} does not match building map {bmap.shape}"
            )
        return RadioMap(image.astype(np.float64) * (255.0 / maxval), tx)


def get_evaluator(model="wall_count", params=None):
    """Resolve a model selector: ``free_space``, ``wall_count`` or ``file:<path>``."""
    if isinstance(model, Evaluator):
        return model
    if isinstance(model, str) and model.startswith("file:"):
        return FileModel(model[len("file:") :])
    return ReferenceModel(model, params)


def _check_tx(bmap, tx):
    if not (0 <= tx.y < bmap.height and 0 <= tx.x < bmap.width):
        raise InvalidArgumentError(f"transmitter {tx} is outside the {bmap.height}x{bmap.width} grid")
    if bmap.cells[tx.y, tx.x]:
        raise InvalidArgumentError(f"transmitter {tx} is on an occupied pixel")


def evaluate(bmap, tx, params=None, model="wall_count"):
    return get_evaluator(model, params)(bmap, tx)


def evaluate_batch(bmap, txs, params=None, model="wall_count", ledger=None, batch_size=None):
    """Evaluate each placement in order; records calls and batches in ``ledger``."""
    evaluator = get_evaluator(model, params)
    txs = list(txs)
    for i, tx in enumerate(txs):
        try:
            _check_tx(bmap, tx)
        except InvalidArgumentError as exc:
            raise InvalidArgumentError(f"txs[{i}]: {exc}") from None
    maps = [evaluator(bmap, tx) for tx in txs]
    if ledger is not None:
        ledger.record(len(txs), n_batches(len(txs), batch_size or ledger.batch_size))
    return maps

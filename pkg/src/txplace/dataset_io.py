"""On-disk formats: building maps, score maps, ground-truth records, manifests, splits.

* building maps: 8-bit PGM, 0 = free, 255 = occupied
* score maps: raw little-endian float64 in region order plus a ``.meta`` sidecar
* ground truth and sidecars: INI-style ``key = value`` text, reals at 17 significant digits
* manifests: CSV sorted by scenario id
"""

from __future__ import annotations

import configparser
import csv
import io
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grid import BuildingMap, Placement, feasible_region
from .oracle import DualOptimum, NormalizedScoreMap
from .pgm import read_pgm, write_pgm
from .validation import FormatError, InvalidArgumentError

log = logging.getLogger(__name__)

SPLITS = ("train", "val", "test")
MANIFEST_FIELDS = ("id", "map", "power_scores", "coverage_scores", "ground_truth", "split")


def fmt_real(v):
    return format(float(v), ".17g")


def _write_ini(path, section, items):
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp[section] = {k: fmt_real(v) if isinstance(v, float) else str(v) for k, v in items.items()}
    buf = io.StringIO()
    cp.write(buf)
    Path(path).write_text(buf.getvalue())


def _read_ini(path, section):
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        raise FormatError(f"{path}: {exc}") from None
    if section not in cp:
        raise FormatError(f"{path}: missing [{section}] section")
    return cp[section]


# building maps

def write_building_map(bmap, path):
    write_pgm(path, np.where(bmap.cells, 255, 0).astype(np.uint8))


def read_building_map(path, id=None):
    image, maxval = read_pgm(path)
    if id is None:
        id = Path(path).stem
    return BuildingMap(image >= (maxval + 1) // 2, id=id)


# score maps

def _meta_path(path):
    path = Path(path)
    return path.with_name(path.name + ".meta")


def write_score_map(nsm, path):
    path = Path(path)
    path.write_bytes(np.ascontiguousarray(nsm.values, dtype="<f8").tobytes())
    r = nsm.region
    _write_ini(
        _meta_path(path),
        "score_map",
        {
            "objective": nsm.objective,
            "width": r.width,
            "height": r.height,
            "margin": r.margin,
            "count": r.size,
            "min_val": float(nsm.min_val),
            "max_val": float(nsm.max_val),
        },
    )


def read_score_map(path, region=None, bmap=None):
    """Read a normalized score map; the region comes from ``region`` or is rebuilt from ``bmap``."""
    path = Path(path)
    meta = _read_ini(_meta_path(path), "score_map")
    if region is None:
        if bmap is None:
            raise InvalidArgumentError("read_score_map needs either a region or its building map")
        region = feasible_region(bmap, int(meta["margin"]))
    if (int(meta["height"]), int(meta["width"]), int(meta["margin"])) != (
        region.height, region.width, region.margin
    ):
        raise FormatError(f"{path}: sidecar geometry does not match the feasible region")
    data = path.read_bytes()
    expected = 8 * region.size
    if len(data) != expected or int(meta["count"]) != region.size:
        raise FormatError(f"{path}: expected {expected} bytes ({region.size} scores), found {len(data)}")
    values = np.frombuffer(data, dtype="<f8").astype(np.float64)
    return NormalizedScoreMap(
        meta["objective"], region, values, float(meta["min_val"]), float(meta["max_val"])
    )


@dataclass(frozen=True)
class Prediction:
    values: np.ndarray
    bit_depth: int | None  # None for raw float64 input


def read_prediction(path, region):
    """Externally produced scores over ``region`` from a PGM or a raw float64 score map."""
    path = Path(path)
    if path.suffix.lower() in (".pgm", ".pnm"):
        image, maxval = read_pgm(path)
        if image.shape != (region.height, region.width):
            raise InvalidArgumentError(
                f"{path}: prediction is {image.shape[0]}x{image.shape[1]}, "
                f"grid is {region.height}x{region.width}"
            )
        depth = 8 if maxval < 256 else 16
        log.debug("read %d-bit prediction %s", depth, path)
        values = image.astype(np.float64)[region.members[:, 0], region.members[:, 1]]
        return Prediction(values, depth)
    return Prediction(np.array(read_score_map(path, region=region).values), None)


def write_prediction_pgm(nsm, path, bits=16):
    """Quantize normalized scores onto the full grid as an 8- or 16-bit PGM (non-members are 0)."""
    maxval = (1 << bits) - 1
    grid = np.zeros((nsm.region.height, nsm.region.width), dtype=np.float64)
    grid[nsm.region.members[:, 0], nsm.region.members[:, 1]] = nsm.values
    write_pgm(path, np.floor(grid * maxval + 0.5).astype(np.int64), maxval=maxval)


# ground truth

def write_ground_truth(opt, path, fingerprint=""):
    def pl(p):
        return f"{p.y} {p.x}"

    _write_ini(
        path,
        "ground_truth",
        {
            "power_opt": pl(opt.power_opt),
            "power_opt_value": opt.power_opt_value,
            "cov_opt": pl(opt.cov_opt),
            "cov_opt_value": opt.cov_opt_value,
            "balanced_opt": pl(opt.balanced_opt),
            "balanced_d": opt.balanced_d,
            "balanced_cov_pct": opt.balanced_cov_pct,
            "balanced_pwr_pct": opt.balanced_pwr_pct,
            "cov_pct_at_power_opt": opt.cov_pct_at_power_opt,
            "pwr_pct_at_cov_opt": opt.pwr_pct_at_cov_opt,
            "evaluator": fingerprint,
        },
    )


def read_ground_truth(path):
    """Return ``(DualOptimum, evaluator fingerprint)``."""
    sec = _read_ini(path, "ground_truth")

    def pl(key):
        y, x = sec[key].split()
        return Placement(int(y), int(x))

    try:
        opt = DualOptimum(
            power_opt=pl("power_opt"),
            power_opt_value=float(sec["power_opt_value"]),
            cov_opt=pl("cov_opt"),
            cov_opt_value=float(sec["cov_opt_value"]),
            balanced_opt=pl("balanced_opt"),
            balanced_d=float(sec["balanced_d"]),
            balanced_cov_pct=float(sec["balanced_cov_pct"]),
            balanced_pwr_pct=float(sec["balanced_pwr_pct"]),
            cov_pct_at_power_opt=float(sec["cov_pct_at_power_opt"]),
            pwr_pct_at_cov_opt=float(sec["pwr_pct_at_cov_opt"]),
        )
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: bad ground-truth record ({exc})") from None
    return opt, sec.get("evaluator", "")


# manifests and splits

@dataclass(frozen=True)
class ScenarioRecord:
    id: str
    map: str
    power_scores: str = ""
    coverage_scores: str = ""
    ground_truth: str = ""
    split: str = ""


def write_manifest(records, path):
    records = sorted(records, key=lambda r: r.id)
    ids = [r.id for r in records]
    if len(set(ids)) != len(ids):
        raise InvalidArgumentError("scenario ids in a manifest must be unique")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MANIFEST_FIELDS)
        for r in records:
            w.writerow([getattr(r, f) for f in MANIFEST_FIELDS])


def read_manifest(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and set(MANIFEST_FIELDS) - set(rows[0]):
        raise FormatError(f"{path}: manifest is missing columns")
    return [ScenarioRecord(**{f: row[f] for f in MANIFEST_FIELDS}) for row in rows]


def split_counts(n, fractions=(0.8, 0.1, 0.1)):
    """Floor the leading fractions; the last split takes the remainder."""
    counts = [math.floor(n * f + 1e-9) for f in fractions[:-1]]
    counts.append(n - sum(counts))
    return counts


def make_splits(records, seed=42, fractions=(0.8, 0.1, 0.1)):
    """Shuffle by ``seed`` and tag contiguous train/val/test ranges."""
    records = sorted(records, key=lambda r: r.id)
    if not records:
        raise InvalidArgumentError("cannot split an empty manifest")
    if len(fractions) != len(SPLITS) or abs(sum(fractions) - 1.0) > 1e-9:
        raise InvalidArgumentError(f"split fractions must be three values summing to 1, got {fractions}")
    perm = np.random.default_rng(seed).permutation(len(records))
    tags = [None] * len(records)
    start = 0
    for name, count in zip(SPLITS, split_counts(len(records), fractions)):
        for j in perm[start : start + count]:
            tags[j] = name
        start += count
    return [ScenarioRecord(**{**r.__dict__, "split": t}) for r, t in zip(records, tags)]

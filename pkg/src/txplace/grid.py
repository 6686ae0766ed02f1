"""Building maps, feasible transmitter regions, and a seeded synthetic corpus."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .validation import InvalidArgumentError

FULL_SIZE = 256
FULL_MARGIN = 53


@dataclass(frozen=True)
class Placement:
    y: int
    x: int

    def __iter__(self):
        yield self.y
        yield self.x

    def __str__(self):
        return f"({self.y},{self.x})"


@dataclass(frozen=True, eq=False)
class BuildingMap:
    """Binary occupancy grid; ``cells[y, x]`` is True where a building stands."""

    cells: np.ndarray
    id: str = "map"

    def __post_init__(self):
        cells = np.array(self.cells, dtype=bool, copy=True)
        if cells.ndim != 2:
            raise InvalidArgumentError(f"building map must be 2-D, got shape {cells.shape}")
        if cells.shape[0] < 4 or cells.shape[1] < 4:
            raise InvalidArgumentError(f"building map must be at least 4x4, got {cells.shape}")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def height(self):
        return self.cells.shape[0]

    @property
    def width(self):
        return self.cells.shape[1]

    @property
    def shape(self):
        return self.cells.shape

    def is_free(self, y, x):
        return 0 <= y < self.height and 0 <= x < self.width and not self.cells[y, x]

    def __eq__(self, other):
        if not isinstance(other, BuildingMap):
            return NotImplemented
        return self.id == other.id and np.array_equal(self.cells, other.cells)

    def __hash__(self):
        return hash((self.id, self.cells.shape, self.cells.tobytes()))

    @classmethod
    def free(cls, height, width, id="free"):
        return cls(np.zeros((height, width), dtype=bool), id=id)


@dataclass(frozen=True, eq=False)
class FeasibleRegion:
    """Free pixels of the central window, in raster order.

    ``members`` is an ``(n, 2)`` int array of ``(y, x)`` rows. Score arrays
    throughout the package are aligned with this order.
    """

    height: int
    width: int
    margin: int
    members: np.ndarray = field(repr=False)

    def __post_init__(self):
        members = np.array(self.members, dtype=np.int64, copy=True).reshape(-1, 2)
        members.setflags(write=False)
        object.__setattr__(self, "members", members)

    @property
    def size(self):
        return self.members.shape[0]

    def __len__(self):
        return self.size

    def placement(self, i):
        y, x = self.members[i]
        return Placement(int(y), int(x))

    def placements(self):
        return [Placement(int(y), int(x)) for y, x in self.members]

    @property
    def flat_index(self):
        """Row-major flat indices of the members into the full grid."""
        return self.members[:, 0] * self.width + self.members[:, 1]

    def index_of(self, p):
        """Raster position of placement ``p`` inside the region, or raise."""
        hit = np.flatnonzero((self.members[:, 0] == p.y) & (self.members[:, 1] == p.x))
        if hit.size == 0:
            raise InvalidArgumentError(f"placement {p} is not in the feasible region")
        return int(hit[0])

    def mask(self):
        m = np.zeros((self.height, self.width), dtype=bool)
        m[self.members[:, 0], self.members[:, 1]] = True
        return m

    def __eq__(self, other):
        if not isinstance(other, FeasibleRegion):
            return NotImplemented
        return (
            (self.height, self.width, self.margin) == (other.height, other.width, other.margin)
            and np.array_equal(self.members, other.members)
        )

    def __hash__(self):
        return hash((self.height, self.width, self.margin, self.members.tobytes()))


def feasible_region(bmap, margin=FULL_MARGIN):
    """Free pixels with ``margin <= y < height - margin`` (same for ``x``)."""
    if margin < 0 or 2 * margin >= min(bmap.height, bmap.width):
        raise InvalidArgumentError(
            f"margin {margin} too large for a {bmap.height}x{bmap.width} grid"
        )
    window = np.zeros(bmap.shape, dtype=bool)
    window[margin : bmap.height - margin, margin : bmap.width - margin] = True
    ys, xs = np.nonzero(window & ~bmap.cells)  # np.nonzero is row-major
    return FeasibleRegion(bmap.height, bmap.width, margin, np.column_stack([ys, xs]))


def generate_building_map(
    seed,
    width=32,
    height=32,
    density=0.25,
    block_size_range=(2, 6),
    margin=None,
    id=None,
    max_blocks=None,
):
    """Drop seeded axis-aligned rectangular blocks until ``density`` is reached.

    When the blocks would cover the entire central window (``margin`` defaults
    to ``min(width, height) // 4``), the block is skipped so that at least one
    feasible pixel survives.
    """
    if not 0.0 <= density < 1.0:
        raise InvalidArgumentError(f"density must be in [0, 1), got {density}")
    lo, hi = block_size_range
    if lo < 1 or hi < lo:
        raise InvalidArgumentError(f"invalid block size range {block_size_range}")
    if margin is None:
        margin = min(width, height) // 4
    if id is None:
        parts = seed if isinstance(seed, (list, tuple)) else [seed]
        id = "s" + "-".join(str(v) for v in parts)
    cells = np.zeros((height, width), dtype=bool)
    target = density * width * height
    budget = max_blocks if max_blocks is not None else 4 * width * height
    rng = np.random.default_rng(seed)
    window = (slice(margin, height - margin), slice(margin, width - margin))
    placed = 0
    while cells.sum() < target and placed < budget:
        placed += 1
        bh, bw = rng.integers(lo, hi + 1, size=2)
        y0 = int(rng.integers(0, max(height - bh, 0) + 1))
        x0 = int(rng.integers(0, max(width - bw, 0) + 1))
        trial = cells.copy()
        trial[y0 : y0 + bh, x0 : x0 + bw] = True
        if trial[window].all():
            continue
        cells = trial
    return BuildingMap(cells, id=id)

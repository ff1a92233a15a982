"""Uniform-depth quadtree tile grids with bottom-up sparse aggregation.

A level ``L`` partitions the root square into ``2^L x 2^L`` half-open tiles.
Only occupied tiles are stored. Rolling a level up to its parent level is a
single sparse matrix multiply against a binary parent-of matrix, which keeps
per-level payloads (counts, centroid accumulators, term-count matrices) exact
sums of their children.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .ingest import PointRecord, RootBounds

DEFAULT_TARGET_PER_TILE = 100
DEFAULT_N_LEVELS = 3

# Slack for points that sit on the root square's closed max edge (or a few
# ulps past it from bounds-center rounding); they clamp into the last tile.
_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class TileKey:
    """Address of one tile: depth plus integer grid indices."""

    level: int
    ix: int
    iy: int

    def __post_init__(self) -> None:
        n = 1 << self.level
        if not (0 <= self.ix < n and 0 <= self.iy < n):
            raise ValueError(f"tile indices ({self.ix},{self.iy}) out of range at level {self.level}")

    def parent(self) -> "TileKey":
        if self.level == 0:
            raise ValueError("root tile has no parent")
        return TileKey(self.level - 1, self.ix // 2, self.iy // 2)


@dataclass(frozen=True)
class TilePayload:
    count: int
    sum_x: float
    sum_y: float

    @property
    def centroid(self) -> tuple[float, float]:
        return self.sum_x / self.count, self.sum_y / self.count


class TileLevel:
    """Occupied tiles of one quadtree depth, in canonical (ix, iy) order.

    ``keys[r]`` is the r-th occupied tile, rows sorted ascending by
    (ix, iy); every per-tile array (counts, coordinate sums, term-count
    matrix rows) follows this row order. ``point_rows[i]`` maps input point
    ``i`` to its row, so per-tile membership stays available at every level.
    """

    def __init__(
        self,
        level: int,
        keys: np.ndarray,
        counts: np.ndarray,
        coord_sums: np.ndarray,
        point_rows: np.ndarray | None = None,
    ):
        self.level = level
        self.keys = keys
        self.counts = counts
        self.coord_sums = coord_sums
        self.point_rows = point_rows
        self._row_of = {(int(ix), int(iy)): r for r, (ix, iy) in enumerate(keys)}

    def __len__(self) -> int:
        return len(self.keys)

    @property
    def total_count(self) -> int:
        return int(self.counts.sum())

    def row_of(self, ix: int, iy: int) -> int:
        """Row index of an occupied tile; KeyError if empty."""
        return self._row_of[(ix, iy)]

    def key_at(self, row: int) -> TileKey:
        ix, iy = self.keys[row]
        return TileKey(self.level, int(ix), int(iy))

    @property
    def occupied(self) -> dict[tuple[int, int], TilePayload]:
        return {
            (int(ix), int(iy)): TilePayload(int(self.counts[r]), float(self.coord_sums[r, 0]), float(self.coord_sums[r, 1]))
            for r, (ix, iy) in enumerate(self.keys)
        }

    def tile_centers(self, bounds: RootBounds) -> np.ndarray:
        """(K, 2) array of tile center coordinates in projection units."""
        width = bounds.side / (1 << self.level)
        centers = np.empty((len(self.keys), 2), dtype=np.float64)
        centers[:, 0] = bounds.xmin + (self.keys[:, 0] + 0.5) * width
        centers[:, 1] = bounds.ymin + (self.keys[:, 1] + 0.5) * width
        return centers

    def points_by_tile(self) -> list[np.ndarray]:
        """Per-row arrays of the point indices that fall in each tile."""
        if self.point_rows is None:
            raise ValueError("this level does not carry point membership")
        order = np.argsort(self.point_rows, kind="stable")
        bounds_idx = np.searchsorted(self.point_rows[order], np.arange(len(self.keys) + 1))
        return [order[bounds_idx[r]:bounds_idx[r + 1]] for r in range(len(self.keys))]


@dataclass
class AggregationMatrix:
    """Binary parent-of matrix for one aggregation step (level -> level-1).

    ``entries[p, c] = 1`` iff child tile ``c``'s key halved equals parent
    tile ``p``'s key; every column has exactly one nonzero.
    """

    level: int
    entries: sparse.csr_matrix
    parent_keys: np.ndarray
    child_keys: np.ndarray
    child_parent_row: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def coords_array(points: Sequence[PointRecord] | Iterable[PointRecord]) -> np.ndarray:
    """Extract an (n, 2) float64 coordinate array from point records."""
    return np.array([(p.x, p.y) for p in points], dtype=np.float64).reshape(-1, 2)


def _tile_indices(xy: np.ndarray, bounds: RootBounds, level: int) -> tuple[np.ndarray, np.ndarray]:
    scale = 1 << level
    fx = (xy[:, 0] - bounds.xmin) / bounds.side
    fy = (xy[:, 1] - bounds.ymin) / bounds.side
    bad = (fx < -_EDGE_TOL) | (fx > 1 + _EDGE_TOL) | (fy < -_EDGE_TOL) | (fy > 1 + _EDGE_TOL)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise ValueError(f"point ({xy[i, 0]}, {xy[i, 1]}) lies outside the root bounds")
    ix = np.clip(np.floor(fx * scale).astype(np.int64), 0, scale - 1)
    iy = np.clip(np.floor(fy * scale).astype(np.int64), 0, scale - 1)
    return ix, iy


def point_to_tile(p: PointRecord, bounds: RootBounds, level: int) -> TileKey:
    """Tile containing a point: ix = floor((x - xmin) / side * 2^level), same for iy.

    Points on the closed max edge clamp into the last tile so every in-bounds
    point maps to exactly one tile.
    """
    if level < 0:
        raise ValueError("level must be >= 0")
    ix, iy = _tile_indices(np.array([[p.x, p.y]], dtype=np.float64), bounds, level)
    return TileKey(level, int(ix[0]), int(iy[0]))


def tile_bounds(key: TileKey, bounds: RootBounds) -> tuple[float, float, float, float]:
    """Tile square as (x0, y0, x1, y1); the 4 children exactly partition it."""
    width = bounds.side / (1 << key.level)
    x0 = bounds.xmin + key.ix * width
    y0 = bounds.ymin + key.iy * width
    return x0, y0, x0 + width, y0 + width


def build_leaf_level(
    points: Sequence[PointRecord] | np.ndarray,
    bounds: RootBounds,
    level_max: int,
) -> TileLevel:
    """Assign every point to its tile at ``level_max`` and accumulate payloads."""
    if level_max < 0:
        raise ValueError("level_max must be >= 0")
    xy = points if isinstance(points, np.ndarray) else coords_array(points)
    ix, iy = _tile_indices(xy, bounds, level_max)
    scale = 1 << level_max
    combined = ix * scale + iy
    uniq, point_rows, counts = np.unique(combined, return_inverse=True, return_counts=True)
    keys = np.column_stack([uniq // scale, uniq % scale])
    coord_sums = np.zeros((len(uniq), 2), dtype=np.float64)
    np.add.at(coord_sums, point_rows, xy)
    return TileLevel(level_max, keys, counts.astype(np.int64), coord_sums, point_rows.astype(np.int64))


def aggregation_matrix(child: TileLevel) -> AggregationMatrix:
    """Parent-of matrix for rolling ``child`` up one level."""
    if child.level == 0:
        raise ValueError("level 0 cannot be aggregated further")
    halved = child.keys // 2
    scale = 1 << (child.level - 1)
    combined = halved[:, 0] * scale + halved[:, 1]
    uniq, child_parent_row = np.unique(combined, return_inverse=True)
    parent_keys = np.column_stack([uniq // scale, uniq % scale])
    n_children = len(child.keys)
    entries = sparse.csr_matrix(
        (np.ones(n_children, dtype=np.int64), (child_parent_row, np.arange(n_children))),
        shape=(len(uniq), n_children),
    )
    return AggregationMatrix(
        level=child.level,
        entries=entries,
        parent_keys=parent_keys,
        child_keys=child.keys.copy(),
        child_parent_row=child_parent_row.astype(np.int64),
    )


def aggregate_level(child: TileLevel, matrix: AggregationMatrix) -> TileLevel:
    """Roll one level up to its parent by sparse multiplication.

    Parent payloads are exact sums of child payloads and equal a fresh
    build_leaf_level at level-1 over the same points.
    """
    if matrix.level != child.level:
        raise ValueError(f"aggregation matrix is for level {matrix.level}, child is level {child.level}")
    if matrix.shape[1] != len(child.keys) or not np.array_equal(matrix.child_keys, child.keys):
        raise ValueError("aggregation matrix does not match the child level's tiles")
    counts = matrix.entries @ child.counts
    coord_sums = matrix.entries @ child.coord_sums
    point_rows = None
    if child.point_rows is not None:
        point_rows = matrix.child_parent_row[child.point_rows]
    return TileLevel(child.level - 1, matrix.parent_keys, counts, coord_sums, point_rows)


def choose_levels(
    n_points: int,
    target_points_per_tile: int = DEFAULT_TARGET_PER_TILE,
    n_levels: int = DEFAULT_N_LEVELS,
) -> list[int]:
    """Pick summary depths: l_max = max(1, ceil(log4(n/target))), then every
    second level below it, clamped to >= 1, deduplicated, descending."""
    if n_points <= 0 or target_points_per_tile <= 0 or n_levels <= 0:
        raise ValueError("all arguments must be positive")
    l_max = 0
    while (4 ** l_max) * target_points_per_tile < n_points:
        l_max += 1
    l_max = max(1, l_max)
    levels = {max(1, l_max - 2 * i) for i in range(n_levels)}
    return sorted(levels, reverse=True)

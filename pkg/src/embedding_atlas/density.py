"""Density estimation and contour geometry over the projection plane.

Gaussian-kernel KDE evaluated on a regular grid of cell centers, one grid
per (group, time) slice; marching-squares isolines closed against the grid
boundary; label positions at the area centroids of the densest contour
rings. Grid evaluation batches the separable kernel into matrix products,
which reproduces the direct per-point summation to near machine precision.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .ingest import PointRecord, RootBounds
from .summarizer import TileSummary
from .tiling import TileKey, coords_array

DEFAULT_GRID = 200
DEFAULT_QUANTILES = (0.20, 0.35, 0.50, 0.65, 0.80, 0.95)
DEFAULT_MAX_LABELS = 12

# Grid values below this fraction of the maximum count as zero when picking
# threshold quantiles; far Gaussian tails would otherwise dominate them.
_POSITIVE_FLOOR = 1e-12

_POINT_CHUNK = 16384


@dataclass(frozen=True)
class Bandwidth:
    """Per-axis Gaussian kernel widths in projection units."""

    hx: float
    hy: float

    def __post_init__(self) -> None:
        if not (self.hx > 0 and self.hy > 0):
            raise ValueError(f"bandwidths must be positive, got ({self.hx}, {self.hy})")


Extent = tuple[float, float, float, float]  # (x0, x1, y0, y1)


def bounds_extent(bounds: RootBounds) -> Extent:
    return (bounds.xmin, bounds.xmax, bounds.ymin, bounds.ymax)


@dataclass
class DensityGrid:
    """KDE likelihoods at the centers of an nx x ny cell grid.

    ``values[i, j]`` is the density at x-center i, y-center j (units 1/area).
    ``slice`` identifies the (group, time) subset the grid was built from;
    None means the overall distribution.
    """

    nx: int
    ny: int
    x0: float
    x1: float
    y0: float
    y1: float
    values: np.ndarray
    slice: tuple[str | None, str | None] | None = None

    @property
    def cell_width(self) -> float:
        return (self.x1 - self.x0) / self.nx

    @property
    def cell_height(self) -> float:
        return (self.y1 - self.y0) / self.ny

    @property
    def x_centers(self) -> np.ndarray:
        return self.x0 + (np.arange(self.nx) + 0.5) * self.cell_width

    @property
    def y_centers(self) -> np.ndarray:
        return self.y0 + (np.arange(self.ny) + 0.5) * self.cell_height

    def mass(self) -> float:
        """Riemann sum of density times cell area."""
        return float(self.values.sum() * self.cell_width * self.cell_height)


@dataclass
class ContourPolygon:
    """All isoline rings of one threshold; rings are closed (first == last)."""

    threshold: float
    rings: list[np.ndarray]
    probability_mass: float = 0.0


@dataclass
class AutoLabel:
    """Label anchored at a dense region's centroid, text from the nearest tile."""

    position: tuple[float, float]
    tile: TileKey
    keywords: list[tuple[str, float]]


@dataclass
class DensitySlices:
    """Overall, per-group, and per-(group, time) density grids.

    Group grids appear only when at least two distinct groups exist (with a
    single group they would duplicate the overall grid). Slice grids are
    keyed by (group, time) with "" standing for "no group tag".
    """

    overall: DensityGrid
    groups: dict[str, DensityGrid]
    slices: dict[tuple[str, str], DensityGrid]
    bandwidths: dict[str, Bandwidth]
    slice_counts: dict[tuple[str, str], int]
    diagnostics: list[str] = field(default_factory=list)

    def all_grids(self) -> Iterable[DensityGrid]:
        yield self.overall
        yield from self.groups.values()
        yield from self.slices.values()

    def __len__(self) -> int:
        return 1 + len(self.groups) + len(self.slices)


def silverman_bandwidth(xy: np.ndarray) -> Bandwidth:
    """Rule-of-thumb bandwidth: n^(-1/6) times the per-axis sample std (d=2).

    The multivariate factor (n (d+2) / 4)^(-1/(d+4)) reduces to n^(-1/6)
    in two dimensions.
    """
    xy = np.asarray(xy, dtype=np.float64)
    n = len(xy)
    if n < 2:
        raise ValueError(
            "Silverman bandwidth needs at least 2 points; pass an explicit --bandwidth override"
        )
    sx = float(xy[:, 0].std(ddof=1))
    sy = float(xy[:, 1].std(ddof=1))
    if sx == 0 or sy == 0:
        raise ValueError(
            "Silverman bandwidth is undefined for zero variance; pass an explicit --bandwidth override"
        )
    factor = float(n) ** (-1.0 / 6.0)
    return Bandwidth(factor * sx, factor * sy)


def kde_grid(
    xy: np.ndarray,
    bandwidth: Bandwidth,
    nx: int,
    ny: int,
    extent: Extent,
    slice_id: tuple[str | None, str | None] | None = None,
) -> DensityGrid:
    """Evaluate the Gaussian-kernel density on cell centers.

    value[i, j] = (1/n) sum_p N((gx_i, gy_j); (x_p, y_p), diag(hx^2, hy^2)).
    The separable kernel is evaluated per axis and combined with a matrix
    product over point chunks; the result equals direct summation up to
    floating-point reassociation.
    """
    x0, x1, y0, y1 = extent
    if nx < 2 or ny < 2 or not (x1 > x0 and y1 > y0):
        raise ValueError("grid extent/resolution is malformed")
    xy = np.asarray(xy, dtype=np.float64).reshape(-1, 2)
    grid = DensityGrid(nx, ny, x0, x1, y0, y1, np.zeros((nx, ny)), slice_id)
    n = len(xy)
    if n == 0:
        return grid
    gx = grid.x_centers
    gy = grid.y_centers
    acc = np.zeros((nx, ny))
    for start in range(0, n, _POINT_CHUNK):
        chunk = xy[start:start + _POINT_CHUNK]
        kx = np.exp(-0.5 * ((gx[None, :] - chunk[:, 0:1]) / bandwidth.hx) ** 2)
        ky = np.exp(-0.5 * ((gy[None, :] - chunk[:, 1:2]) / bandwidth.hy) ** 2)
        acc += kx.T @ ky
    grid.values = acc / (n * 2 * math.pi * bandwidth.hx * bandwidth.hy)
    return grid


def kde_slices(
    points: Sequence[PointRecord],
    extent: Extent | RootBounds,
    nx: int = DEFAULT_GRID,
    ny: int = DEFAULT_GRID,
    bandwidth: Bandwidth | None = None,
    slice_by_group: bool = True,
    slice_by_time: bool = True,
) -> DensitySlices:
    """Overall grid plus per-group and per-(group, time) grids.

    All grids share ``extent``; each group's time slices reuse the
    full-group bandwidth so slices stay comparable under animation. Slices
    with fewer than 2 points come back as zero grids with a diagnostic so
    the time slider has no gaps.
    """
    if isinstance(extent, RootBounds):
        extent = bounds_extent(extent)
    if not points:
        raise ValueError("no points")
    xy = coords_array(points)
    diagnostics: list[str] = []

    overall_bw = bandwidth if bandwidth is not None else silverman_bandwidth(xy)
    overall = kde_grid(xy, overall_bw, nx, ny, extent)
    bandwidths = {"": overall_bw}

    group_members: dict[str, list[int]] = defaultdict(list)
    if slice_by_group:
        for i, p in enumerate(points):
            if p.group is not None:
                group_members[p.group].append(i)
    groups = sorted(group_members)

    group_grids: dict[str, DensityGrid] = {}
    group_bw: dict[str, Bandwidth] = {}
    for g in groups:
        idx = np.array(group_members[g], dtype=np.int64)
        bw = bandwidth if bandwidth is not None else silverman_bandwidth(xy[idx])
        group_bw[g] = bw
        bandwidths[g] = bw
        if len(groups) >= 2:
            group_grids[g] = kde_grid(xy[idx], bw, nx, ny, extent, slice_id=(g, None))

    slice_grids: dict[tuple[str, str], DensityGrid] = {}
    slice_counts: dict[tuple[str, str], int] = {}
    if slice_by_time:
        slice_pools: list[tuple[str, np.ndarray, Bandwidth]] = (
            [(g, np.array(group_members[g], dtype=np.int64), group_bw[g]) for g in groups]
            if groups
            else [("", np.arange(len(points), dtype=np.int64), overall_bw)]
        )
        for g, pool, bw in slice_pools:
            by_time: dict[str, list[int]] = defaultdict(list)
            for i in pool:
                t = points[int(i)].time
                if t is not None:
                    by_time[t].append(int(i))
            for t in sorted(by_time):
                idx = np.array(by_time[t], dtype=np.int64)
                slice_counts[(g, t)] = len(idx)
                if len(idx) < 2:
                    diagnostics.append(
                        f"slice (group={g!r}, time={t!r}) has {len(idx)} point(s); emitting a zero grid"
                    )
                    slice_grids[(g, t)] = DensityGrid(
                        nx, ny, *extent, values=np.zeros((nx, ny)), slice=(g or None, t)
                    )
                else:
                    slice_grids[(g, t)] = kde_grid(xy[idx], bw, nx, ny, extent, slice_id=(g or None, t))

    return DensitySlices(overall, group_grids, slice_grids, bandwidths, slice_counts, diagnostics)


def default_thresholds(grid: DensityGrid, quantiles: Sequence[float] = DEFAULT_QUANTILES) -> list[float]:
    """Density levels at the given quantiles of the grid's positive values."""
    peak = float(grid.values.max(initial=0.0))
    if peak <= 0:
        return []
    positive = grid.values[grid.values > _POSITIVE_FLOOR * peak]
    return [float(np.quantile(positive, q)) for q in sorted(quantiles)]


# --- marching squares ---------------------------------------------------
#
# The sampled lattice is the grid's cell centers plus a ring of zero-valued
# nodes placed exactly on the grid extent, so every positive isoline closes
# inside the extent instead of exiting it. A node counts as inside when its
# value strictly exceeds the threshold; each crossing edge is shared by
# exactly two cells, so the traced segments always form disjoint loops.

_H, _V = 0, 1


def _segments_for_cell(code: int, center_inside: bool) -> tuple[tuple[int, int], ...]:
    # corner bits: 1=a(i,j) 2=b(i+1,j) 4=c(i+1,j+1) 8=d(i,j+1)
    # edges per cell: 0=bottom 1=right 2=top 3=left
    table: dict[int, tuple[tuple[int, int], ...]] = {
        0: (), 15: (),
        1: ((3, 0),), 14: ((3, 0),),
        2: ((0, 1),), 13: ((0, 1),),
        4: ((1, 2),), 11: ((1, 2),),
        8: ((2, 3),), 7: ((2, 3),),
        3: ((3, 1),), 12: ((3, 1),),
        6: ((0, 2),), 9: ((0, 2),),
    }
    if code == 5:  # a and c inside
        return ((0, 1), (2, 3)) if center_inside else ((3, 0), (1, 2))
    if code == 10:  # b and d inside
        return ((3, 0), (1, 2)) if center_inside else ((0, 1), (2, 3))
    return table[code]


def _trace_rings(xs: np.ndarray, ys: np.ndarray, vals: np.ndarray, threshold: float) -> list[np.ndarray]:
    """Closed isoline loops of ``vals > threshold`` on the (xs x ys) lattice."""
    inside = vals > threshold
    if not inside.any():
        return []
    n_y = len(ys)

    def h_edge(i: int, j: int) -> int:
        return ((_H * len(xs)) + i) * n_y + j

    def v_edge(i: int, j: int) -> int:
        return ((_V * len(xs)) + i) * n_y + j

    crossings: dict[int, tuple[float, float]] = {}

    def cross_h(i: int, j: int) -> int:
        e = h_edge(i, j)
        if e not in crossings:
            v0, v1 = vals[i, j], vals[i + 1, j]
            f = (threshold - v0) / (v1 - v0)
            crossings[e] = (xs[i] + f * (xs[i + 1] - xs[i]), ys[j])
        return e

    def cross_v(i: int, j: int) -> int:
        e = v_edge(i, j)
        if e not in crossings:
            v0, v1 = vals[i, j], vals[i, j + 1]
            f = (threshold - v0) / (v1 - v0)
            crossings[e] = (xs[i], ys[j] + f * (ys[j + 1] - ys[j]))
        return e

    adjacency: dict[int, list[int]] = defaultdict(list)
    cell_rows, cell_cols = np.nonzero(
        inside[:-1, :-1] | inside[1:, :-1] | inside[1:, 1:] | inside[:-1, 1:]
    )
    for i, j in zip(cell_rows.tolist(), cell_cols.tolist()):
        code = (
            int(inside[i, j])
            | int(inside[i + 1, j]) << 1
            | int(inside[i + 1, j + 1]) << 2
            | int(inside[i, j + 1]) << 3
        )
        if code in (0, 15):
            continue
        center_inside = (vals[i, j] + vals[i + 1, j] + vals[i + 1, j + 1] + vals[i, j + 1]) / 4 > threshold
        for e0, e1 in _segments_for_cell(code, center_inside):
            ids = []
            for side in (e0, e1):
                if side == 0:
                    ids.append(cross_h(i, j))
                elif side == 1:
                    ids.append(cross_v(i + 1, j))
                elif side == 2:
                    ids.append(cross_h(i, j + 1))
                else:
                    ids.append(cross_v(i, j))
            adjacency[ids[0]].append(ids[1])
            adjacency[ids[1]].append(ids[0])

    rings: list[np.ndarray] = []
    visited: set[int] = set()
    for start in sorted(adjacency):
        if start in visited:
            continue
        loop = [start]
        visited.add(start)
        current = min(adjacency[start])
        previous = start
        while current != start:
            loop.append(current)
            visited.add(current)
            n0, n1 = adjacency[current]
            previous, current = current, (n1 if n0 == previous else n0)
        ring = _normalize_ring([crossings[e] for e in loop])
        if ring is not None:
            rings.append(ring)
    return rings


def _normalize_ring(vertices: list[tuple[float, float]]) -> np.ndarray | None:
    # drop exact consecutive duplicates (threshold landing on a node)
    deduped = [vertices[0]]
    for v in vertices[1:]:
        if v != deduped[-1]:
            deduped.append(v)
    if len(deduped) >= 2 and deduped[0] == deduped[-1]:
        deduped.pop()
    if len(deduped) < 3:
        return None
    ring = np.array(deduped)
    if _signed_area(ring) < 0:
        ring = ring[::-1]
    start = int(np.lexsort((ring[:, 1], ring[:, 0]))[0])
    ring = np.roll(ring, -start, axis=0)
    return np.vstack([ring, ring[:1]])


def _signed_area(ring: np.ndarray) -> float:
    x, y = ring[:, 0], ring[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def ring_area(ring: np.ndarray) -> float:
    """Enclosed area of a closed ring (absolute value)."""
    return abs(_signed_area(ring[:-1]))


def ring_centroid(ring: np.ndarray) -> tuple[float, float]:
    """Area centroid of a closed ring."""
    v = ring[:-1]
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = cross.sum() / 2
    if area == 0:
        return float(x.mean()), float(y.mean())
    cx = float(((x + xn) * cross).sum() / (6 * area))
    cy = float(((y + yn) * cross).sum() / (6 * area))
    return cx, cy


def points_in_ring(ring: np.ndarray, xy: np.ndarray) -> np.ndarray:
    """Ray-casting containment test for each point against one closed ring."""
    xy = np.asarray(xy, dtype=np.float64).reshape(-1, 2)
    x0s, y0s = ring[:-1, 0], ring[:-1, 1]
    x1s, y1s = ring[1:, 0], ring[1:, 1]
    inside = np.zeros(len(xy), dtype=bool)
    px = xy[:, 0:1]
    py = xy[:, 1:2]
    straddles = (y0s[None, :] > py) != (y1s[None, :] > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = x0s[None, :] + (py - y0s[None, :]) / (y1s[None, :] - y0s[None, :]) * (
            x1s[None, :] - x0s[None, :]
        )
    hits = straddles & (px < x_cross)
    inside = hits.sum(axis=1) % 2 == 1
    return inside


def extract_contours(
    grid: DensityGrid,
    thresholds: Sequence[float],
    points_xy: np.ndarray | None = None,
) -> list[ContourPolygon]:
    """Marching-squares isolines at each threshold, lowest first.

    Thresholds must be positive and ascending. Thresholds above the grid
    maximum yield nothing. When ``points_xy`` is given, each polygon's
    probability_mass is the fraction of those points inside its rings
    (even-odd rule).
    """
    thresholds = list(thresholds)
    if any(t <= 0 for t in thresholds):
        raise ValueError("thresholds must be positive")
    if any(b < a for a, b in zip(thresholds, thresholds[1:])):
        raise ValueError("thresholds must be ascending")

    xs = np.concatenate([[grid.x0], grid.x_centers, [grid.x1]])
    ys = np.concatenate([[grid.y0], grid.y_centers, [grid.y1]])
    vals = np.zeros((grid.nx + 2, grid.ny + 2))
    vals[1:-1, 1:-1] = grid.values

    polygons: list[ContourPolygon] = []
    for t in thresholds:
        rings = _trace_rings(xs, ys, vals, t)
        if not rings:
            continue
        mass = 0.0
        if points_xy is not None and len(points_xy):
            inside_count = np.zeros(len(points_xy), dtype=np.int64)
            for ring in rings:
                inside_count += points_in_ring(ring, points_xy)
            mass = float((inside_count % 2 == 1).mean())
        polygons.append(ContourPolygon(t, rings, mass))
    return polygons


def auto_labels(
    polygon: ContourPolygon,
    summaries: Sequence[TileSummary] | Mapping[TileKey, TileSummary],
    bounds: RootBounds,
    max_labels: int = DEFAULT_MAX_LABELS,
    diagnostics: list[str] | None = None,
) -> list[AutoLabel]:
    """Place labels at ring centroids of the high-probability contour band.

    Rings are taken in descending enclosed-area order; each label anchors to
    the occupied tile (among ``summaries``) whose center is nearest the ring
    centroid. A ring is skipped when its nearest tile is already labeled or
    lies more than two tile widths away.
    """
    if isinstance(summaries, Mapping):
        summaries = list(summaries.values())
    if not summaries:
        raise ValueError("no summaries to label from")
    levels = {s.key.level for s in summaries}
    if len(levels) != 1:
        raise ValueError("summaries must all come from one level")
    label_level = levels.pop()
    tile_width = bounds.side / (1 << label_level)
    centers = np.array(
        [
            (
                bounds.xmin + (s.key.ix + 0.5) * tile_width,
                bounds.ymin + (s.key.iy + 0.5) * tile_width,
            )
            for s in summaries
        ]
    )

    ordered = sorted(
        polygon.rings,
        key=lambda r: (-ring_area(r), r[0, 0], r[0, 1]),
    )
    labels: list[AutoLabel] = []
    used: set[TileKey] = set()
    for ring in ordered:
        if len(labels) >= max_labels:
            break
        cx, cy = ring_centroid(ring)
        d2 = (centers[:, 0] - cx) ** 2 + (centers[:, 1] - cy) ** 2
        best = int(np.lexsort((np.arange(len(summaries)), d2))[0])
        summary = summaries[best]
        if math.sqrt(float(d2[best])) > 2 * tile_width:
            if diagnostics is not None:
                diagnostics.append(
                    f"no occupied tile within 2 tile widths of ring centroid ({cx:.4g}, {cy:.4g}); skipped"
                )
            continue
        if summary.key in used:
            continue
        used.add(summary.key)
        labels.append(AutoLabel((cx, cy), summary.key, list(summary.keywords)))
    return labels

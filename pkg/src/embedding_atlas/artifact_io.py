"""The three-file artifact: point stream, density grids, tile summaries.

Files written into one directory:

``data.ndjson``
    One point per line (ingest schema). A point's line number (0-based) is
    its stable index; search results and exemplars refer to it.

``grid.json``
    Single JSON document::

        {"meta": {...manifest...},
         "extent": {"x0","x1","y0","y1"},
         "resolution": {"nx","ny"},
         "bandwidths": {"<group or ''>": {"hx","hy"}},
         "thresholds": [...],
         "overall": [nx*ny values, row-major (x-major)],
         "group_grids": {"<group>": [...]},
         "grids": {"<group or ''>": {"<time>": [...]}},
         "slice_counts": {"<group or ''>": {"<time>": n}}}

``summary.json``
    Single JSON document::

        {"meta": {"version", "mode"},
         "levels": [{"level", "tile_width",
                     "tiles": [{"ix","iy","cx","cy","count",
                                "keywords": [[term, score], ...]
                                | "exemplars": [point index, ...]}]}],
         "labels": [{"x","y","level","ix","iy","keywords"}]}

Levels are listed by descending depth; tiles by ascending (ix, iy). All
numbers use the shortest round-trip decimal form and key order is fixed, so
equal inputs produce byte-identical files.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .density import AutoLabel, Bandwidth, DensityGrid, DensitySlices
from .ingest import ParseError, PointRecord, RootBounds, parse_points, point_to_json
from .summarizer import TileSummary
from .tiling import TileKey, TileLevel

SCHEMA_VERSION = "1.0.0"

DATA_FILE = "data.ndjson"
GRID_FILE = "grid.json"
SUMMARY_FILE = "summary.json"


@dataclass
class SummaryArtifact:
    """Paths of one exported artifact set plus its manifest."""

    data_path: Path
    grid_path: Path
    summary_path: Path
    manifest: dict

    @property
    def directory(self) -> Path:
        return self.data_path.parent


@dataclass
class GridDocument:
    """Parsed grid.json: manifest, thresholds, and reconstructed grids."""

    meta: dict
    thresholds: list[float]
    bandwidths: dict[str, Bandwidth]
    overall: DensityGrid
    group_grids: dict[str, DensityGrid]
    slices: dict[tuple[str, str], DensityGrid]
    slice_counts: dict[tuple[str, str], int]


@dataclass
class SummaryDocument:
    """Parsed summary.json: per-level summaries plus map labels."""

    meta: dict
    levels: dict[int, list[TileSummary]]
    tile_counts: dict[int, list[int]]
    labels: list[AutoLabel] = field(default_factory=list)


def _check_version(meta: dict, path: Path) -> None:
    version = str(meta.get("version", ""))
    major = version.split(".", 1)[0]
    ours = SCHEMA_VERSION.split(".", 1)[0]
    if major != ours:
        raise ValueError(
            f"{path}: unsupported artifact version {version!r} (this reader understands {ours}.x)"
        )


def _dump(document: dict, path: Path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(document, fh, ensure_ascii=False, separators=(",", ":"))
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def write_data(points: Iterable[PointRecord], path: Path | str) -> int:
    """Write the ND-JSON point stream; returns the number of lines."""
    path = Path(path)
    count = 0
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for point in points:
                fh.write(point_to_json(point))
                fh.write("\n")
                count += 1
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return count


def read_data(path: Path | str) -> list[PointRecord]:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        try:
            return list(parse_points(fh, strict=True))
        except ParseError as exc:
            raise ParseError(f"{path}: {exc}", exc.line, exc.offset) from exc


def _grid_values(grid: DensityGrid) -> list[float]:
    return grid.values.reshape(-1).tolist()


def write_grid(
    slices: DensitySlices,
    thresholds: Sequence[float],
    bounds: RootBounds,
    path: Path | str,
    meta: dict,
) -> None:
    """Serialize all density grids plus the manifest into grid.json."""
    overall = slices.overall
    for g in slices.all_grids():
        if (g.x0, g.x1, g.y0, g.y1, g.nx, g.ny) != (
            overall.x0, overall.x1, overall.y0, overall.y1, overall.nx, overall.ny,
        ):
            raise ValueError("all grids in one artifact must share extent and resolution")

    grids_by_group: dict[str, dict[str, list[float]]] = {}
    counts_by_group: dict[str, dict[str, int]] = {}
    for (group, time) in sorted(slices.slices):
        grids_by_group.setdefault(group, {})[time] = _grid_values(slices.slices[(group, time)])
        counts_by_group.setdefault(group, {})[time] = slices.slice_counts[(group, time)]

    document = {
        "meta": meta,
        "extent": {"x0": overall.x0, "x1": overall.x1, "y0": overall.y0, "y1": overall.y1},
        "resolution": {"nx": overall.nx, "ny": overall.ny},
        "bandwidths": {
            key: {"hx": bw.hx, "hy": bw.hy} for key, bw in sorted(slices.bandwidths.items())
        },
        "thresholds": [float(t) for t in thresholds],
        "overall": _grid_values(overall),
        "group_grids": {g: _grid_values(slices.groups[g]) for g in sorted(slices.groups)},
        "grids": grids_by_group,
        "slice_counts": counts_by_group,
    }
    _dump(document, Path(path))


def _grid_from_values(values: list[float], meta_extent: dict, resolution: dict, slice_id=None) -> DensityGrid:
    nx, ny = resolution["nx"], resolution["ny"]
    return DensityGrid(
        nx=nx,
        ny=ny,
        x0=meta_extent["x0"],
        x1=meta_extent["x1"],
        y0=meta_extent["y0"],
        y1=meta_extent["y1"],
        values=np.array(values, dtype=np.float64).reshape(nx, ny),
        slice=slice_id,
    )


def read_grid(path: Path | str) -> GridDocument:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        document = json.load(fh)
    meta = document["meta"]
    _check_version(meta, path)
    extent = document["extent"]
    resolution = document["resolution"]
    slices = {}
    slice_counts = {}
    for group, by_time in document["grids"].items():
        for time, values in by_time.items():
            slices[(group, time)] = _grid_from_values(
                values, extent, resolution, slice_id=(group or None, time)
            )
            slice_counts[(group, time)] = document["slice_counts"][group][time]
    return GridDocument(
        meta=meta,
        thresholds=[float(t) for t in document["thresholds"]],
        bandwidths={
            key: Bandwidth(bw["hx"], bw["hy"]) for key, bw in document["bandwidths"].items()
        },
        overall=_grid_from_values(document["overall"], extent, resolution),
        group_grids={
            g: _grid_from_values(v, extent, resolution, slice_id=(g, None))
            for g, v in document["group_grids"].items()
        },
        slices=slices,
        slice_counts=slice_counts,
    )


def write_summaries(
    levels: dict[int, tuple[TileLevel, list[TileSummary]]],
    bounds: RootBounds,
    path: Path | str,
    mode: str,
    labels: Sequence[AutoLabel] = (),
) -> None:
    """Serialize per-level tile summaries (descending depth) and labels."""
    if not levels:
        raise ValueError("need at least one summarized level")
    level_docs = []
    for depth in sorted(levels, reverse=True):
        tile_level, summaries = levels[depth]
        width = bounds.side / (1 << depth)
        tiles = []
        for row, summary in enumerate(summaries):
            ix, iy = int(tile_level.keys[row, 0]), int(tile_level.keys[row, 1])
            record: dict = {
                "ix": ix,
                "iy": iy,
                "cx": bounds.xmin + (ix + 0.5) * width,
                "cy": bounds.ymin + (iy + 0.5) * width,
                "count": int(tile_level.counts[row]),
            }
            if mode == "text":
                record["keywords"] = [[term, score] for term, score in summary.keywords]
            else:
                record["exemplars"] = list(summary.exemplars)
            tiles.append(record)
        level_docs.append({"level": depth, "tile_width": width, "tiles": tiles})

    document = {
        "meta": {"version": SCHEMA_VERSION, "mode": mode},
        "levels": level_docs,
        "labels": [
            {
                "x": lab.position[0],
                "y": lab.position[1],
                "level": lab.tile.level,
                "ix": lab.tile.ix,
                "iy": lab.tile.iy,
                "keywords": [[term, score] for term, score in lab.keywords],
            }
            for lab in labels
        ],
    }
    _dump(document, Path(path))


def read_summaries(path: Path | str) -> SummaryDocument:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        document = json.load(fh)
    meta = document["meta"]
    _check_version(meta, path)
    mode = meta.get("mode", "text")
    levels: dict[int, list[TileSummary]] = {}
    tile_counts: dict[int, list[int]] = {}
    for level_doc in document["levels"]:
        depth = level_doc["level"]
        summaries = []
        counts = []
        for tile in level_doc["tiles"]:
            key = TileKey(depth, tile["ix"], tile["iy"])
            if mode == "text":
                summaries.append(
                    TileSummary(key, keywords=[(term, score) for term, score in tile["keywords"]])
                )
            else:
                summaries.append(TileSummary(key, exemplars=list(tile["exemplars"])))
            counts.append(tile["count"])
        levels[depth] = summaries
        tile_counts[depth] = counts
    labels = [
        AutoLabel(
            (lab["x"], lab["y"]),
            TileKey(lab["level"], lab["ix"], lab["iy"]),
            [(term, score) for term, score in lab["keywords"]],
        )
        for lab in document.get("labels", [])
    ]
    return SummaryDocument(meta=meta, levels=levels, tile_counts=tile_counts, labels=labels)


def load_manifest(directory: Path | str) -> dict:
    directory = Path(directory)
    grid_path = directory / GRID_FILE
    if not grid_path.is_file():
        raise FileNotFoundError(f"{grid_path}: artifact grid file missing")
    with open(grid_path, encoding="utf-8") as fh:
        meta = json.load(fh).get("meta")
    if not isinstance(meta, dict):
        raise ValueError(f"{grid_path}: manifest (meta) missing or malformed")
    _check_version(meta, grid_path)
    return meta


def validate_artifact(directory: Path | str) -> SummaryArtifact:
    """Check the three files exist and the manifest matches their contents."""
    directory = Path(directory)
    paths = {name: directory / name for name in (DATA_FILE, GRID_FILE, SUMMARY_FILE)}
    for name, path in paths.items():
        if not path.is_file():
            raise FileNotFoundError(f"artifact file {name} missing from {directory}")
    manifest = load_manifest(directory)

    with open(paths[DATA_FILE], encoding="utf-8") as fh:
        n_lines = sum(1 for line in fh if line.strip())
    declared = manifest.get("counts", {}).get("points")
    if declared != n_lines:
        raise ValueError(
            f"manifest declares {declared} points but {DATA_FILE} has {n_lines} records"
        )

    summary = read_summaries(paths[SUMMARY_FILE])
    declared_levels = list(manifest.get("levels", []))
    if sorted(summary.levels, reverse=True) != declared_levels:
        raise ValueError(
            f"manifest levels {declared_levels} do not match summary file levels "
            f"{sorted(summary.levels, reverse=True)}"
        )
    return SummaryArtifact(paths[DATA_FILE], paths[GRID_FILE], paths[SUMMARY_FILE], manifest)

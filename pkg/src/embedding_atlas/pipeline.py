"""End-to-end artifact construction: points in, three files out."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Sequence

from . import artifact_io, density, summarizer, tiling
from .artifact_io import SCHEMA_VERSION, SummaryArtifact
from .density import AutoLabel, Bandwidth, DensitySlices
from .ingest import ParseDiagnostic, PointRecord, RootBounds, infer_bounds, parse_points
from .summarizer import TileSummary, Vocabulary
from .tiling import TileLevel

logger = logging.getLogger(__name__)


@dataclass
class BuildConfig:
    pad_fraction: float = 0.01
    strict: bool = False
    levels: Sequence[int] | None = None
    target_per_tile: int = tiling.DEFAULT_TARGET_PER_TILE
    n_levels: int = tiling.DEFAULT_N_LEVELS
    mode: str = "auto"  # auto | text | exemplar
    ngram_max: int = summarizer.DEFAULT_NGRAM_MAX
    top_k: int = summarizer.DEFAULT_TOP_K
    stopwords: str | None = None  # None/"none" | "builtin" | path
    min_df: int = summarizer.DEFAULT_MIN_DF
    grid: int = density.DEFAULT_GRID
    bandwidth: tuple[float, float] | None = None
    threshold_quantiles: Sequence[float] = density.DEFAULT_QUANTILES
    max_labels: int = density.DEFAULT_MAX_LABELS
    text_key: str = "t"
    time_key: str = "time"
    group_key: str = "g"


@dataclass
class BuildResult:
    points: list[PointRecord]
    bounds: RootBounds
    levels: list[int]
    mode: str
    tile_levels: dict[int, TileLevel]
    summaries: dict[int, list[TileSummary]]
    vocabulary: Vocabulary | None
    slices: DensitySlices
    thresholds: list[float]
    labels: list[AutoLabel]
    diagnostics: list[str] = field(default_factory=list)

    def manifest(self) -> dict:
        groups = sorted({p.group for p in self.points if p.group is not None})
        times = sorted({p.time for p in self.points if p.time is not None})
        return {
            "version": SCHEMA_VERSION,
            "mode": self.mode,
            "counts": {
                "points": len(self.points),
                "documents": sum(1 for p in self.points if p.text is not None),
            },
            "levels": self.levels,
            "groups": groups,
            "times": times,
        }


def _resolve_stopwords(setting: str | None) -> frozenset[str] | None:
    if setting is None or setting == "none":
        return None
    if setting == "builtin":
        return summarizer.BUILTIN_STOPWORDS
    path = Path(setting)
    words = {w.strip().lower() for w in path.read_text(encoding="utf-8").split() if w.strip()}
    if not words:
        raise ValueError(f"stopword file {path} is empty")
    return frozenset(words)


def build(points: Sequence[PointRecord], config: BuildConfig | None = None) -> BuildResult:
    """Run tiling, summarization, density, and labeling over parsed points."""
    config = config or BuildConfig()
    points = list(points)
    if not points:
        raise ValueError("no points")
    diagnostics: list[str] = []

    bounds = infer_bounds(points, config.pad_fraction)
    if config.levels:
        levels = sorted({int(l) for l in config.levels}, reverse=True)
        if levels[-1] < 0:
            raise ValueError("levels must be >= 0")
    else:
        levels = tiling.choose_levels(len(points), config.target_per_tile, config.n_levels)

    mode = config.mode
    if mode == "auto":
        mode = "text" if any(p.text is not None for p in points) else "exemplar"
    if mode not in ("text", "exemplar"):
        raise ValueError(f"unknown mode {mode!r}")

    xy = tiling.coords_array(points)
    current = tiling.build_leaf_level(xy, bounds, levels[0])
    counts = None
    vocabulary = None
    if mode == "text":
        vocabulary, counts = summarizer.build_count_matrix(
            current,
            [p.text for p in points],
            ngram_max=config.ngram_max,
            stopwords=_resolve_stopwords(config.stopwords),
            min_df=config.min_df,
        )

    tile_levels: dict[int, TileLevel] = {}
    summaries: dict[int, list[TileSummary]] = {}
    wanted = set(levels)
    depth = levels[0]
    while True:
        if depth in wanted:
            tile_levels[depth] = current
            if mode == "text":
                summaries[depth] = summarizer.keyword_summaries(
                    current, counts, vocabulary, config.top_k
                )
            else:
                summaries[depth] = summarizer.exemplar_summaries(current, xy, config.top_k)
        if depth == levels[-1]:
            break
        matrix = tiling.aggregation_matrix(current)
        current = tiling.aggregate_level(current, matrix)
        if counts is not None:
            counts = summarizer.aggregate_count_matrix(counts, matrix)
        depth -= 1

    bandwidth = Bandwidth(*config.bandwidth) if config.bandwidth else None
    slices = density.kde_slices(
        points,
        density.bounds_extent(bounds),
        nx=config.grid,
        ny=config.grid,
        bandwidth=bandwidth,
    )
    diagnostics.extend(slices.diagnostics)

    thresholds = density.default_thresholds(slices.overall, config.threshold_quantiles)
    labels: list[AutoLabel] = []
    if thresholds:
        top = density.extract_contours(slices.overall, [thresholds[-1]])
        if top:
            coarsest = levels[-1]
            labels = density.auto_labels(
                top[0],
                summaries[coarsest],
                bounds,
                max_labels=config.max_labels,
                diagnostics=diagnostics,
            )

    return BuildResult(
        points=points,
        bounds=bounds,
        levels=levels,
        mode=mode,
        tile_levels=tile_levels,
        summaries=summaries,
        vocabulary=vocabulary,
        slices=slices,
        thresholds=thresholds,
        labels=labels,
        diagnostics=diagnostics,
    )


def write_artifact(result: BuildResult, out_dir: Path | str) -> SummaryArtifact:
    """Write the three artifact files for a build result."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    data_path = out_dir / artifact_io.DATA_FILE
    grid_path = out_dir / artifact_io.GRID_FILE
    summary_path = out_dir / artifact_io.SUMMARY_FILE

    manifest = result.manifest()
    artifact_io.write_data(result.points, data_path)
    artifact_io.write_grid(result.slices, result.thresholds, result.bounds, grid_path, manifest)
    artifact_io.write_summaries(
        {depth: (result.tile_levels[depth], result.summaries[depth]) for depth in result.levels},
        result.bounds,
        summary_path,
        mode=result.mode,
        labels=result.labels,
    )
    return SummaryArtifact(data_path, grid_path, summary_path, manifest)


def build_artifact(
    source: Path | str | IO[str] | Iterable[str],
    out_dir: Path | str,
    config: BuildConfig | None = None,
) -> SummaryArtifact:
    """Parse an ND-JSON source, build, and export the artifact set."""
    config = config or BuildConfig()
    parse_diags: list[ParseDiagnostic] = []

    def _run(stream) -> list[PointRecord]:
        return list(
            parse_points(
                stream,
                strict=config.strict,
                diagnostics=parse_diags,
                text_key=config.text_key,
                time_key=config.time_key,
                group_key=config.group_key,
            )
        )

    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            points = _run(fh)
    else:
        points = _run(source)

    result = build(points, config)
    for diag in parse_diags:
        result.diagnostics.append(f"parse: {diag.message}")
        logger.warning("parse diagnostic: %s", diag.message)
    return write_artifact(result, out_dir)

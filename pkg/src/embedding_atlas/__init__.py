"""embedding-atlas: multi-resolution summaries, density maps, and search
for large collections of 2D-projected embedding points."""

from .artifact_io import SCHEMA_VERSION, SummaryArtifact
from .density import AutoLabel, Bandwidth, ContourPolygon, DensityGrid
from .ingest import PointRecord, RootBounds, infer_bounds, parse_points
from .pipeline import BuildConfig, build, build_artifact
from .search import SearchIndex, SearchResult, build_index, query
from .summarizer import TileSummary, Vocabulary, tokenize
from .tiling import TileKey, TileLevel, choose_levels

__version__ = "0.1.0"

__all__ = [
    "AutoLabel",
    "Bandwidth",
    "BuildConfig",
    "ContourPolygon",
    "DensityGrid",
    "PointRecord",
    "RootBounds",
    "SCHEMA_VERSION",
    "SearchIndex",
    "SearchResult",
    "SummaryArtifact",
    "TileKey",
    "TileLevel",
    "TileSummary",
    "Vocabulary",
    "build",
    "build_artifact",
    "build_index",
    "choose_levels",
    "infer_bounds",
    "parse_points",
    "query",
    "tokenize",
    "__version__",
]

"""Command line entry points: build an artifact, serve it, query it offline."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import pipeline, search as search_mod
from .artifact_io import read_data, validate_artifact
from .service import ServerConfig, serve


def _parse_levels(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embedding-atlas",
        description="Multi-resolution summaries, density maps, and search for 2D embeddings",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    build = sub.add_parser("build", help="build the three-file artifact from ND-JSON points")
    build.add_argument("--input", required=True, help="ND-JSON point file")
    build.add_argument("--out", required=True, help="output artifact directory")
    build.add_argument("--strict", action="store_true", help="abort on the first bad record")
    build.add_argument("--pad", type=float, default=pipeline.BuildConfig.pad_fraction,
                       help="root square padding fraction")
    build.add_argument("--levels", type=_parse_levels, default=None,
                       help="explicit summary depths, e.g. 8,6,4")
    build.add_argument("--target-per-tile", type=int, default=pipeline.BuildConfig.target_per_tile,
                       help="target points per finest-level tile")
    build.add_argument("--mode", choices=["auto", "text", "exemplar"], default="auto")
    build.add_argument("--ngram-max", type=int, default=pipeline.BuildConfig.ngram_max)
    build.add_argument("--top-k", type=int, default=pipeline.BuildConfig.top_k)
    build.add_argument("--stopwords", default="none",
                       help="'none', 'builtin', or a path to a word list")
    build.add_argument("--min-df", type=int, default=pipeline.BuildConfig.min_df)
    build.add_argument("--grid", type=int, default=pipeline.BuildConfig.grid,
                       help="density grid resolution per axis")
    build.add_argument("--bandwidth", type=_parse_floats, default=None, metavar="HX,HY",
                       help="override the Silverman bandwidth")
    build.add_argument("--thresholds", type=_parse_floats,
                       default=tuple(pipeline.BuildConfig.threshold_quantiles),
                       metavar="Q1,Q2,...", help="contour quantiles in (0,1)")
    build.add_argument("--max-labels", type=int, default=pipeline.BuildConfig.max_labels)
    build.add_argument("--text-key", default="t")
    build.add_argument("--time-key", default="time")
    build.add_argument("--group-key", default="g")

    srv = sub.add_parser("serve", help="serve an artifact directory over HTTP")
    srv.add_argument("--dir", required=True, help="artifact directory")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8080)
    srv.add_argument("--cors", action="store_true", help="allow cross-origin requests")

    query = sub.add_parser("search", help="query an artifact offline (debugging path)")
    query.add_argument("--dir", required=True, help="artifact directory")
    query.add_argument("--q", required=True, help="query string")
    query.add_argument("--limit", type=int, default=20)

    return parser


def _cmd_build(args: argparse.Namespace) -> int:
    bandwidth = args.bandwidth
    if bandwidth is not None and len(bandwidth) != 2:
        print("error: --bandwidth expects HX,HY", file=sys.stderr)
        return 2
    config = pipeline.BuildConfig(
        pad_fraction=args.pad,
        strict=args.strict,
        levels=args.levels,
        target_per_tile=args.target_per_tile,
        mode=args.mode,
        ngram_max=args.ngram_max,
        top_k=args.top_k,
        stopwords=args.stopwords,
        min_df=args.min_df,
        grid=args.grid,
        bandwidth=bandwidth,
        threshold_quantiles=args.thresholds,
        max_labels=args.max_labels,
        text_key=args.text_key,
        time_key=args.time_key,
        group_key=args.group_key,
    )
    artifact = pipeline.build_artifact(args.input, args.out, config)
    manifest = artifact.manifest
    print(
        f"wrote {artifact.directory}: {manifest['counts']['points']} points, "
        f"levels {manifest['levels']}, mode {manifest['mode']}"
    )
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    config = ServerConfig(directory=Path(args.dir), host=args.host, port=args.port, cors=args.cors)
    try:
        serve(config)
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def _cmd_search(args: argparse.Namespace) -> int:
    artifact = validate_artifact(args.dir)
    if artifact.manifest.get("mode") != "text":
        print("error: search requires text", file=sys.stderr)
        return 1
    index = search_mod.build_index(read_data(artifact.data_path))
    for result in search_mod.query(index, args.q, args.limit):
        print(json.dumps(
            {"point_index": result.point_index, "score": result.score, "snippet": result.snippet},
            ensure_ascii=False,
        ))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        if args.command == "build":
            return _cmd_build(args)
        if args.command == "serve":
            return _cmd_serve(args)
        if args.command == "search":
            return _cmd_search(args)
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())

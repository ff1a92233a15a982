"""HTTP service over a built artifact directory.

Endpoints:
    GET /api/manifest                      -> artifact manifest
    GET /api/search?q=<query>&limit=<n>    -> ranked search results
    GET /files/{data.ndjson|grid.json|summary.json}
        Static artifact files; single byte ranges honored with 206,
        full data.ndjson streamed in chunks.

The artifact is immutable while serving: the manifest and search index are
built once at startup, every request handler is read-only.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.responses import JSONResponse, Response, StreamingResponse
from pydantic import BaseModel

from . import search as search_mod
from .artifact_io import DATA_FILE, GRID_FILE, SUMMARY_FILE, read_data, validate_artifact

_CHUNK = 64 * 1024
_RANGE_RE = re.compile(r"bytes=(\d*)-(\d*)")

_MEDIA_TYPES = {
    DATA_FILE: "application/x-ndjson",
    GRID_FILE: "application/json",
    SUMMARY_FILE: "application/json",
}


@dataclass
class ServerConfig:
    directory: Path
    host: str = "127.0.0.1"
    port: int = 8080
    cors: bool = False


class SearchHit(BaseModel):
    point_index: int
    score: float
    snippet: str


class SearchResponse(BaseModel):
    query: str
    limit: int
    results: list[SearchHit]


def create_app(config: ServerConfig) -> FastAPI:
    """Validate the artifact, build the search index, and wire the routes."""
    artifact = validate_artifact(config.directory)
    manifest = artifact.manifest

    index = None
    if manifest.get("mode") == "text":
        index = search_mod.build_index(read_data(artifact.data_path))

    app = FastAPI(title="embedding-atlas", version=str(manifest.get("version", "")))

    if config.cors:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware, allow_origins=["*"], allow_methods=["GET"], allow_headers=["*"]
        )

    @app.get("/api/manifest")
    def get_manifest() -> JSONResponse:
        return JSONResponse(manifest)

    @app.get("/api/search", response_model=SearchResponse)
    def get_search(q: str = Query(default=""), limit: int = Query(default=20, ge=1, le=1000)):
        if index is None:
            raise HTTPException(status_code=400, detail="search requires text")
        results = search_mod.query(index, q, limit)
        return SearchResponse(
            query=q,
            limit=limit,
            results=[
                SearchHit(point_index=r.point_index, score=r.score, snippet=r.snippet)
                for r in results
            ],
        )

    @app.get("/files/{name}")
    def get_file(name: str, request: Request) -> Response:
        if name not in _MEDIA_TYPES:
            raise HTTPException(status_code=404, detail=f"unknown artifact file {name!r}")
        path = config.directory / name
        return _file_response(path, _MEDIA_TYPES[name], request.headers.get("range"))

    return app


def _parse_range(header: str, size: int) -> tuple[int, int] | None:
    """First satisfiable (start, end) of a single-range header, or None."""
    match = _RANGE_RE.fullmatch(header.strip())
    if not match or (not match[1] and not match[2]):
        return None
    if match[1]:
        start = int(match[1])
        end = int(match[2]) if match[2] else size - 1
    else:
        start = max(0, size - int(match[2]))
        end = size - 1
    if start >= size or end < start:
        raise HTTPException(
            status_code=416,
            detail="requested range not satisfiable",
            headers={"Content-Range": f"bytes */{size}"},
        )
    return start, min(end, size - 1)


def _file_response(path: Path, media_type: str, range_header: str | None) -> Response:
    size = path.stat().st_size
    base_headers = {"Accept-Ranges": "bytes"}

    byte_range = _parse_range(range_header, size) if range_header else None
    if byte_range is not None:
        start, end = byte_range
        with open(path, "rb") as fh:
            fh.seek(start)
            body = fh.read(end - start + 1)
        return Response(
            content=body,
            status_code=206,
            media_type=media_type,
            headers={**base_headers, "Content-Range": f"bytes {start}-{end}/{size}"},
        )

    def stream() -> Iterator[bytes]:
        with open(path, "rb") as fh:
            while chunk := fh.read(_CHUNK):
                yield chunk

    return StreamingResponse(
        stream(),
        media_type=media_type,
        headers={**base_headers, "Content-Length": str(size)},
    )


def serve(config: ServerConfig) -> None:
    """Run the service until interrupted; in-flight responses finish on shutdown."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")

"""Streaming ND-JSON point ingestion and root-bounds inference.

Input schema (one JSON object per line, UTF-8):
    required  "x": number, "y": number
    optional  "t": string (document text), "time": string, "g": string (group)
Unknown keys are ignored.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Sequence

logger = logging.getLogger(__name__)

DEFAULT_PAD_FRACTION = 0.01

# Side length used when every point is coincident; a zero-extent root square
# would make tile assignment undefined.
_DEGENERATE_SIDE = 1.0


@dataclass(frozen=True)
class PointRecord:
    """One embedding point: 2D projected coordinates plus optional tags."""

    x: float
    y: float
    text: str | None = None
    time: str | None = None
    group: str | None = None


@dataclass(frozen=True)
class RootBounds:
    """Square region that contains every input point.

    The square is [cx - side/2, cx + side/2) x [cy - side/2, cy + side/2),
    half-open so each point belongs to exactly one tile. Points landing on
    the closed max edge are clamped inward by one tile-index step during
    assignment (see tiling.point_to_tile).
    """

    cx: float
    cy: float
    side: float
    pad_fraction: float = DEFAULT_PAD_FRACTION

    def __post_init__(self) -> None:
        if not (self.side > 0 and math.isfinite(self.side)):
            raise ValueError(f"root square side must be positive, got {self.side}")

    @property
    def xmin(self) -> float:
        return self.cx - self.side / 2

    @property
    def xmax(self) -> float:
        return self.cx + self.side / 2

    @property
    def ymin(self) -> float:
        return self.cy - self.side / 2

    @property
    def ymax(self) -> float:
        return self.cy + self.side / 2


class ParseError(ValueError):
    """Malformed input line; carries 1-based line number and byte offset."""

    def __init__(self, message: str, line: int, offset: int):
        super().__init__(f"line {line} (byte offset {offset}): {message}")
        self.line = line
        self.offset = offset


@dataclass(frozen=True)
class ParseDiagnostic:
    """One lenient-mode rejection: which line, where, and why."""

    line: int
    offset: int
    message: str


def parse_points(
    stream: Iterable[str] | IO[str],
    *,
    strict: bool = False,
    diagnostics: list[ParseDiagnostic] | None = None,
    text_key: str = "t",
    time_key: str = "time",
    group_key: str = "g",
) -> Iterator[PointRecord]:
    """Parse an ND-JSON line source into PointRecords, lazily and in order.

    Yields one record per well-formed line as soon as it is read; the source
    is never materialized. Blank lines are skipped. In lenient mode (the
    default) malformed lines and records with non-finite coordinates are
    dropped with a diagnostic; in strict mode they raise ParseError.
    """
    offset = 0
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        line_offset = offset
        offset += len(raw.encode("utf-8"))
        if not raw.endswith("\n"):
            offset += 1
        if not line:
            continue
        try:
            yield _parse_line(line, lineno, line_offset, text_key, time_key, group_key)
        except ParseError as exc:
            if strict:
                raise
            diag = ParseDiagnostic(exc.line, exc.offset, str(exc))
            if diagnostics is not None:
                diagnostics.append(diag)
            logger.warning("skipping bad record: %s", exc)


def _parse_line(
    line: str,
    lineno: int,
    offset: int,
    text_key: str,
    time_key: str,
    group_key: str,
) -> PointRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", lineno, offset) from exc
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object", lineno, offset)

    try:
        x = float(obj["x"])
        y = float(obj["y"])
    except KeyError as exc:
        raise ParseError(f"missing required key {exc.args[0]!r}", lineno, offset) from exc
    except (TypeError, ValueError) as exc:
        raise ParseError("coordinates must be numbers", lineno, offset) from exc
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ParseError(f"non-finite coordinate ({x}, {y})", lineno, offset)

    def _opt_str(key: str) -> str | None:
        value = obj.get(key)
        if value is None:
            return None
        if not isinstance(value, str):
            raise ParseError(f"key {key!r} must be a string", lineno, offset)
        return value

    return PointRecord(
        x=x,
        y=y,
        text=_opt_str(text_key),
        time=_opt_str(time_key),
        group=_opt_str(group_key),
    )


def point_to_json(point: PointRecord) -> str:
    """Serialize one record to its ND-JSON line (no trailing newline)."""
    obj: dict[str, object] = {"x": point.x, "y": point.y}
    if point.text is not None:
        obj["t"] = point.text
    if point.time is not None:
        obj["time"] = point.time
    if point.group is not None:
        obj["g"] = point.group
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def infer_bounds(
    points: Sequence[PointRecord] | Iterable[PointRecord],
    pad_fraction: float = DEFAULT_PAD_FRACTION,
) -> RootBounds:
    """Compute the padded root square covering all points.

    side = (1 + pad_fraction) * max(x extent, y extent), centered on the
    data's bounding-box center. Deterministic for a fixed input sequence.
    """
    if pad_fraction < 0:
        raise ValueError("pad_fraction must be >= 0")
    xmin = ymin = math.inf
    xmax = ymax = -math.inf
    n = 0
    for p in points:
        n += 1
        xmin = min(xmin, p.x)
        xmax = max(xmax, p.x)
        ymin = min(ymin, p.y)
        ymax = max(ymax, p.y)
    if n == 0:
        raise ValueError("no points")
    extent = max(xmax - xmin, ymax - ymin)
    side = (1 + pad_fraction) * extent
    if side <= 0:
        side = _DEGENERATE_SIDE
    return RootBounds(
        cx=xmin + (xmax - xmin) / 2,
        cy=ymin + (ymax - ymin) / 2,
        side=side,
        pad_fraction=pad_fraction,
    )

"""Per-tile summaries: tile-based TF-IDF keywords or centroid exemplars.

Text mode merges all documents whose points share a tile into one
meta-document, counts n-grams once at the finest level, and rolls the count
matrix up through the level hierarchy with the same sparse multiply the tile
payloads use. Term scores are ``tf * log(1 + N / df)`` where N is the number
of occupied tiles at the level and df the number of tiles containing the
term. Non-text datasets get the points nearest each tile's centroid instead.

N-grams never span document boundaries, so meta-document counts are exactly
additive under tile merging; this is what makes the one-multiply-per-level
update equal a recount from raw text.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .tiling import AggregationMatrix, TileKey, TileLevel

DEFAULT_NGRAM_MAX = 2
DEFAULT_TOP_K = 5
DEFAULT_MIN_DF = 1

_WORD_RE = re.compile(r"[^\W_]+")

# Small English function-word list for optional n-gram filtering (off by
# default). An n-gram is dropped only when every token in it is a stopword.
BUILTIN_STOPWORDS = frozenset(
    """a about above after again all am an and any are as at be because been
    before being below between both but by can did do does doing down during
    each few for from further had has have having he her here hers him his
    how i if in into is it its itself just me more most my no nor not now of
    off on once only or other our ours out over own same she so some such
    than that the their theirs them then there these they this those through
    to too under until up very was we were what when where which while who
    whom why will with you your yours""".split()
)


@dataclass
class Vocabulary:
    """Ordered n-gram list frozen at the finest level; parents reuse it."""

    terms: list[str]
    term_to_index: dict[str, int]

    def __len__(self) -> int:
        return len(self.terms)

    @classmethod
    def from_terms(cls, terms: Iterable[str]) -> "Vocabulary":
        terms = list(terms)
        return cls(terms, {t: i for i, t in enumerate(terms)})


@dataclass
class CountMatrix:
    """Sparse tiles x terms n-gram counts; rows follow TileLevel row order."""

    level: int
    counts: sparse.csr_matrix

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape


@dataclass
class TileSummary:
    key: TileKey
    keywords: list[tuple[str, float]] = field(default_factory=list)
    exemplars: list[int] = field(default_factory=list)


def word_tokens(text: str) -> list[str]:
    """Lowercased Unicode-alphanumeric word tokens, in text order."""
    return _WORD_RE.findall(text.lower())


def tokenize(
    text: str,
    ngram_max: int = DEFAULT_NGRAM_MAX,
    stopwords: frozenset[str] | set[str] | None = None,
) -> Counter[str]:
    """Multiset of contiguous n-grams (space-joined), n = 1..ngram_max."""
    if ngram_max < 1:
        raise ValueError("ngram_max must be >= 1")
    tokens = word_tokens(text)
    counts: Counter[str] = Counter()
    for n in range(1, ngram_max + 1):
        for i in range(len(tokens) - n + 1):
            gram = tokens[i] if n == 1 else " ".join(tokens[i:i + n])
            if stopwords is not None and all(t in stopwords for t in tokens[i:i + n]):
                continue
            counts[gram] += 1
    return counts


def build_count_matrix(
    leaf_level: TileLevel,
    texts: Sequence[str | None],
    ngram_max: int = DEFAULT_NGRAM_MAX,
    stopwords: frozenset[str] | set[str] | None = None,
    min_df: int = DEFAULT_MIN_DF,
) -> tuple[Vocabulary, CountMatrix]:
    """Count n-grams of each tile's meta-document at the finest level.

    ``texts[i]`` is point i's document (None or empty treated as empty).
    The vocabulary keeps terms in first-seen order and drops terms occurring
    in fewer than ``min_df`` tiles.
    """
    if leaf_level.point_rows is None:
        raise ValueError("leaf level must carry point membership")
    if len(texts) != len(leaf_level.point_rows):
        raise ValueError("texts must align with the points the level was built from")
    if not any(t for t in texts):
        raise ValueError("text mode requires at least one non-empty document")

    term_ids: dict[str, int] = {}
    rows: list[int] = []
    cols: list[int] = []
    vals: list[int] = []
    for i, text in enumerate(texts):
        if not text:
            continue
        row = int(leaf_level.point_rows[i])
        for term, count in tokenize(text, ngram_max, stopwords).items():
            col = term_ids.setdefault(term, len(term_ids))
            rows.append(row)
            cols.append(col)
            vals.append(count)

    n_rows = len(leaf_level.keys)
    counts = sparse.coo_matrix(
        (
            np.asarray(vals, dtype=np.int64),
            (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64)),
        ),
        shape=(n_rows, len(term_ids)),
    ).tocsr()
    counts.sum_duplicates()

    vocabulary = Vocabulary.from_terms(term_ids)
    if min_df > 1:
        df = np.bincount(counts.indices, minlength=len(term_ids))
        keep = np.flatnonzero(df >= min_df)
        counts = counts[:, keep]
        vocabulary = Vocabulary.from_terms(vocabulary.terms[i] for i in keep)
    return vocabulary, CountMatrix(leaf_level.level, counts)


def aggregate_count_matrix(counts: CountMatrix, matrix: AggregationMatrix) -> CountMatrix:
    """Parent counts = parent-of matrix @ child counts (one sparse multiply)."""
    if matrix.level != counts.level:
        raise ValueError(f"aggregation matrix is for level {matrix.level}, counts are level {counts.level}")
    if matrix.shape[1] != counts.shape[0]:
        raise ValueError("aggregation matrix width does not match count matrix rows")
    return CountMatrix(counts.level - 1, (matrix.entries @ counts.counts).tocsr())


def ttfidf_scores(counts: CountMatrix) -> sparse.csr_matrix:
    """score(tile, term) = tf * log(1 + N / df); zero count stays zero."""
    mat = counts.counts
    n_tiles = mat.shape[0]
    if n_tiles < 1:
        raise ValueError("need at least one occupied tile")
    df = np.bincount(mat.indices, minlength=mat.shape[1])
    idf = np.zeros(mat.shape[1], dtype=np.float64)
    present = df > 0
    idf[present] = np.log1p(n_tiles / df[present])
    scored = mat.data.astype(np.float64) * idf[mat.indices]
    return sparse.csr_matrix((scored, mat.indices.copy(), mat.indptr.copy()), shape=mat.shape)


def top_keywords(
    scores_row: sparse.spmatrix | np.ndarray,
    vocabulary: Vocabulary,
    k: int = DEFAULT_TOP_K,
) -> list[tuple[str, float]]:
    """k highest-scoring terms, descending; ties break by ascending term.

    Zero-score terms are excluded, so fewer than k entries may come back.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if sparse.issparse(scores_row):
        row = scores_row.tocsr()
        idx, val = row.indices, row.data
    else:
        arr = np.asarray(scores_row).ravel()
        idx = np.flatnonzero(arr)
        val = arr[idx]
    pairs = [(vocabulary.terms[int(i)], float(v)) for i, v in zip(idx, val) if v > 0]
    pairs.sort(key=lambda p: (-p[1], p[0]))
    return pairs[:k]


def keyword_summaries(
    level: TileLevel,
    counts: CountMatrix,
    vocabulary: Vocabulary,
    k: int = DEFAULT_TOP_K,
) -> list[TileSummary]:
    """One keyword summary per occupied tile, in row order."""
    if counts.level != level.level or counts.shape[0] != len(level.keys):
        raise ValueError("count matrix does not match the tile level")
    scores = ttfidf_scores(counts)
    return [
        TileSummary(level.key_at(r), keywords=top_keywords(scores[r], vocabulary, k))
        for r in range(len(level.keys))
    ]


def centroid_exemplars(point_indices: np.ndarray, xy: np.ndarray, k: int = DEFAULT_TOP_K) -> list[int]:
    """k point indices nearest the tile's mean 2D coordinate; ties by index."""
    if k < 1:
        raise ValueError("k must be >= 1")
    point_indices = np.asarray(point_indices, dtype=np.int64)
    if len(point_indices) == 0:
        raise ValueError("tile has no points")
    coords = xy[point_indices]
    centroid = coords.mean(axis=0)
    d2 = ((coords - centroid) ** 2).sum(axis=1)
    order = np.lexsort((point_indices, d2))
    return [int(point_indices[i]) for i in order[:k]]


def exemplar_summaries(level: TileLevel, xy: np.ndarray, k: int = DEFAULT_TOP_K) -> list[TileSummary]:
    """One exemplar summary per occupied tile, in row order."""
    members = level.points_by_tile()
    return [
        TileSummary(level.key_at(r), exemplars=centroid_exemplars(members[r], xy, k))
        for r in range(len(level.keys))
    ]

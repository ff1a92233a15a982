"""Inverted-index full-text search over point documents.

Queries are conjunctive over their tokens, with the final token matched as
a prefix (mirrors type-as-you-search behavior). The score of a matching
document is

    sum over query tokens of (tf / doc_length) * log(1 + N / df)
    + 1 / (1 + g)   when the query has >= 2 tokens,

where N is the number of indexed documents, df the number of documents
containing the token, and g the smallest token gap (|pos_a - pos_b| - 1 over
distinct positions) between occurrences of two different query tokens. The
prefix token is scored as a pseudo-term: tf and positions pool every index
term starting with the prefix, df is the number of documents containing any
of them.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from math import log1p
from typing import Sequence

from .ingest import PointRecord
from .summarizer import _WORD_RE, word_tokens

DEFAULT_LIMIT = 20
_SNIPPET_TOKENS = 8


@dataclass
class SearchIndex:
    """Immutable term -> (point index, positions) postings over text points."""

    postings: dict[str, list[tuple[int, tuple[int, ...]]]]
    doc_lengths: dict[int, int]
    texts: dict[int, str]
    n_docs: int
    sorted_terms: list[str] = field(default_factory=list)

    def document_frequency(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def prefix_terms(self, prefix: str) -> list[str]:
        """All index terms starting with ``prefix``, ascending."""
        lo = bisect.bisect_left(self.sorted_terms, prefix)
        out = []
        for i in range(lo, len(self.sorted_terms)):
            if not self.sorted_terms[i].startswith(prefix):
                break
            out.append(self.sorted_terms[i])
        return out


@dataclass(frozen=True)
class SearchResult:
    point_index: int
    score: float
    snippet: str


def build_index(points: Sequence[PointRecord]) -> SearchIndex:
    """Index every unigram token of every point that carries text."""
    if not any(p.text is not None for p in points):
        raise ValueError("search requires text")
    postings: dict[str, list[tuple[int, tuple[int, ...]]]] = {}
    doc_lengths: dict[int, int] = {}
    texts: dict[int, str] = {}
    for i, point in enumerate(points):
        if point.text is None:
            continue
        tokens = word_tokens(point.text)
        doc_lengths[i] = len(tokens)
        texts[i] = point.text
        positions: dict[str, list[int]] = {}
        for pos, token in enumerate(tokens):
            positions.setdefault(token, []).append(pos)
        for token, pos_list in positions.items():
            postings.setdefault(token, []).append((i, tuple(pos_list)))
    return SearchIndex(
        postings=postings,
        doc_lengths=doc_lengths,
        texts=texts,
        n_docs=len(doc_lengths),
        sorted_terms=sorted(postings),
    )


def _min_gap(position_lists: list[tuple[int, ...]]) -> int | None:
    """Smallest |p - q| - 1 over distinct positions of two different tokens."""
    best: int | None = None
    for a in range(len(position_lists)):
        for b in range(a + 1, len(position_lists)):
            for p in position_lists[a]:
                for q in position_lists[b]:
                    if p == q:
                        continue
                    gap = abs(p - q) - 1
                    if best is None or gap < best:
                        best = gap
                        if best == 0:
                            return 0
    return best


def _snippet(text: str, first_pos: int) -> str:
    spans = [m.span() for m in _WORD_RE.finditer(text)]
    if not spans:
        return ""
    first_pos = min(first_pos, len(spans) - 1)
    start = max(0, first_pos - 3)
    end = min(len(spans), start + _SNIPPET_TOKENS)
    return text[spans[start][0]:spans[end - 1][1]]


def query(index: SearchIndex, q: str, limit: int = DEFAULT_LIMIT) -> list[SearchResult]:
    """Ranked conjunctive search; the final token matches as a prefix.

    The pre-limit match set is exactly the documents containing all query
    tokens; results sort by descending score, ties by ascending point index.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    tokens = word_tokens(q)
    if not tokens:
        return []
    full_tokens, prefix = tokens[:-1], tokens[-1]

    candidates: set[int] | None = None
    for token in full_tokens:
        docs = {doc for doc, _ in index.postings.get(token, ())}
        candidates = docs if candidates is None else candidates & docs
        if not candidates:
            return []

    expansions = index.prefix_terms(prefix)
    prefix_hits: dict[int, tuple[int, list[int]]] = {}
    for term in expansions:
        for doc, positions in index.postings[term]:
            tf, pooled = prefix_hits.get(doc, (0, []))
            prefix_hits[doc] = (tf + len(positions), pooled + list(positions))
    if candidates is None:
        candidates = set(prefix_hits)
    else:
        candidates &= set(prefix_hits)
    if not candidates:
        return []
    prefix_df = len(prefix_hits)

    full_df = {token: index.document_frequency(token) for token in set(full_tokens)}
    full_positions: dict[str, dict[int, tuple[int, ...]]] = {
        token: dict(index.postings[token]) for token in set(full_tokens)
    }

    results = []
    for doc in candidates:
        doc_len = index.doc_lengths[doc]
        score = 0.0
        position_lists: list[tuple[int, ...]] = []
        for token in full_tokens:
            positions = full_positions[token][doc]
            score += (len(positions) / doc_len) * log1p(index.n_docs / full_df[token])
            position_lists.append(positions)
        tf, pooled = prefix_hits[doc]
        pooled_positions = tuple(sorted(set(pooled)))
        score += (tf / doc_len) * log1p(index.n_docs / prefix_df)
        position_lists.append(pooled_positions)
        if len(tokens) >= 2:
            gap = _min_gap(position_lists)
            if gap is not None:
                score += 1.0 / (1.0 + gap)
        first = min(min(p) for p in position_lists if p)
        results.append(SearchResult(doc, score, _snippet(index.texts[doc], first)))

    results.sort(key=lambda r: (-r.score, r.point_index))
    return results[:limit]

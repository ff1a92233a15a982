from __future__ import annotations

import numpy as np
import pytest

from embedding_atlas.ingest import PointRecord, RootBounds

CLUSTER_VOCABS = [
    ["neural", "translation", "attention", "encoder", "decoder"],
    ["parsing", "grammar", "syntax", "treebank", "dependency"],
    ["dialogue", "speech", "agents", "utterance", "turns"],
    ["retrieval", "ranking", "index", "relevance", "corpus"],
    ["sentiment", "opinion", "polarity", "review", "aspect"],
]


def make_cluster_corpus(
    centers: list[tuple[float, float]],
    vocabs: list[list[str]],
    n_per_cluster: int,
    sigma: float = 0.03,
    seed: int = 0,
    doc_words: int = 6,
    times: list[str] | None = None,
    groups: list[str] | None = None,
) -> list[PointRecord]:
    """Synthetic corpus: Gaussian point blobs with disjoint vocabularies."""
    rng = np.random.default_rng(seed)
    points = []
    for c, (center, words) in enumerate(zip(centers, vocabs)):
        for _ in range(n_per_cluster):
            x = float(rng.normal(center[0], sigma))
            y = float(rng.normal(center[1], sigma))
            text = " ".join(rng.choice(words, size=doc_words))
            points.append(
                PointRecord(
                    x,
                    y,
                    text=text,
                    time=times[c % len(times)] if times else None,
                    group=groups[c % len(groups)] if groups else None,
                )
            )
    return points


@pytest.fixture
def unit_bounds() -> RootBounds:
    """The unit square as a root region (no padding)."""
    return RootBounds(cx=0.5, cy=0.5, side=1.0, pad_fraction=0.0)


@pytest.fixture
def three_cluster_corpus() -> list[PointRecord]:
    centers = [(0.2, 0.2), (0.3, 0.8), (0.8, 0.75)]
    return make_cluster_corpus(centers, CLUSTER_VOCABS[:3], n_per_cluster=200, seed=11)

from __future__ import annotations

from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from embedding_atlas.ingest import PointRecord, infer_bounds
from embedding_atlas.summarizer import (
    BUILTIN_STOPWORDS,
    Vocabulary,
    aggregate_count_matrix,
    build_count_matrix,
    centroid_exemplars,
    exemplar_summaries,
    keyword_summaries,
    tokenize,
    top_keywords,
    ttfidf_scores,
)
from embedding_atlas.tiling import aggregate_level, aggregation_matrix, build_leaf_level, point_to_tile

from conftest import CLUSTER_VOCABS, make_cluster_corpus


class TestTokenize:
    def test_lowercase_and_split(self):
        assert tokenize("Neural Machine Translation", 1) == Counter(
            {"neural": 1, "machine": 1, "translation": 1}
        )

    def test_counting(self):
        assert tokenize("a b a", 1) == Counter({"a": 2, "b": 1})

    def test_bigram_windows(self):
        assert tokenize("x y z", 2) == Counter({"x": 1, "y": 1, "z": 1, "x y": 1, "y z": 1})

    def test_empty_text(self):
        assert tokenize("", 2) == Counter()

    def test_punctuation_and_unicode(self):
        assert tokenize("café, CAFÉ!", 1) == Counter({"café": 2})
        assert "_" not in "".join(tokenize("a_b", 1))

    def test_stopword_only_ngrams_removed(self):
        counts = tokenize("state of the art", 2, stopwords=BUILTIN_STOPWORDS)
        assert "of the" not in counts
        assert "of" not in counts
        assert counts["state of"] == 1
        assert counts["state"] == 1

    def test_invalid_ngram_max(self):
        with pytest.raises(ValueError):
            tokenize("x", 0)


def _two_tile_fixture():
    # one point in the left half, one in the right
    points = [PointRecord(0.25, 0.5, text="cat cat"), PointRecord(0.75, 0.5, text="dog")]
    bounds = infer_bounds(points, pad_fraction=0.0)
    leaf = build_leaf_level(points, bounds, 1)
    return points, bounds, leaf


class TestBuildCountMatrix:
    def test_direct_count(self):
        _, _, leaf = _two_tile_fixture()
        vocab, matrix = build_count_matrix(leaf, ["cat cat", "dog"], ngram_max=1)
        assert vocab.terms == ["cat", "dog"]
        assert matrix.counts.toarray().tolist() == [[2, 0], [0, 1]]

    def test_single_meta_document(self):
        points = [PointRecord(0.5, 0.5, text="a b"), PointRecord(0.5, 0.5, text="b c")]
        bounds = infer_bounds(points)
        leaf = build_leaf_level(points, bounds, 2)
        vocab, matrix = build_count_matrix(leaf, ["a b", "b c"], ngram_max=1)
        assert matrix.shape[0] == 1
        row = dict(zip(vocab.terms, matrix.counts.toarray()[0]))
        assert row == {"a": 1, "b": 2, "c": 1}

    def test_row_sums_equal_tile_token_counts(self):
        # independent counter: whitespace word count per tile
        rng = np.random.default_rng(4)
        words = ["alpha", "beta", "gamma", "delta"]
        points, texts = [], []
        for _ in range(200):
            text = " ".join(rng.choice(words, size=rng.integers(1, 7)))
            points.append(PointRecord(float(rng.uniform()), float(rng.uniform()), text=text))
            texts.append(text)
        bounds = infer_bounds(points)
        leaf = build_leaf_level(points, bounds, 3)
        _, matrix = build_count_matrix(leaf, texts, ngram_max=1)
        expected = np.zeros(len(leaf.keys))
        for i, text in enumerate(texts):
            expected[leaf.point_rows[i]] += len(text.split())
        assert np.array_equal(np.asarray(matrix.counts.sum(axis=1)).ravel(), expected)

    def test_min_df_filters_rare_terms(self):
        _, _, leaf = _two_tile_fixture()
        vocab, matrix = build_count_matrix(
            leaf, ["cat cat shared", "dog shared"], ngram_max=1, min_df=2
        )
        assert vocab.terms == ["shared"]
        assert matrix.counts.toarray().tolist() == [[1], [1]]

    def test_no_documents_error(self):
        _, _, leaf = _two_tile_fixture()
        with pytest.raises(ValueError, match="non-empty"):
            build_count_matrix(leaf, [None, ""], ngram_max=1)


class TestAggregateCountMatrix:
    def test_sibling_rows_add(self):
        _, _, leaf = _two_tile_fixture()
        vocab, matrix = build_count_matrix(leaf, ["cat cat", "dog"], ngram_max=1)
        merged = aggregate_count_matrix(matrix, aggregation_matrix(leaf))
        assert merged.level == 0
        assert merged.counts.toarray().tolist() == [[2, 1]]

    def test_total_count_preserved(self):
        corpus = make_cluster_corpus([(0.2, 0.2), (0.8, 0.8)], CLUSTER_VOCABS[:2], 100, seed=2)
        bounds = infer_bounds(corpus)
        leaf = build_leaf_level(corpus, bounds, 4)
        _, matrix = build_count_matrix(leaf, [p.text for p in corpus])
        current, level = matrix, leaf
        total = matrix.counts.sum()
        while level.level > 0:
            agg = aggregation_matrix(level)
            current = aggregate_count_matrix(current, agg)
            level = aggregate_level(level, agg)
            assert current.counts.sum() == total

    def test_rebuild_from_scratch_oracle(self):
        corpus = make_cluster_corpus(
            [(0.2, 0.3), (0.7, 0.6), (0.4, 0.85)], CLUSTER_VOCABS[:3], 120, seed=8
        )
        texts = [p.text for p in corpus]
        bounds = infer_bounds(corpus)
        level = build_leaf_level(corpus, bounds, 4)
        vocab, matrix = build_count_matrix(level, texts)
        for depth in (3, 2):
            agg = aggregation_matrix(level)
            matrix = aggregate_count_matrix(matrix, agg)
            level = aggregate_level(level, agg)
            fresh_level = build_leaf_level(corpus, bounds, depth)
            fresh = np.zeros(matrix.shape)
            for i, text in enumerate(texts):
                for term, count in tokenize(text).items():
                    fresh[fresh_level.point_rows[i], vocab.term_to_index[term]] += count
            assert np.array_equal(matrix.counts.toarray(), fresh)

    def test_dimension_mismatch_rejected(self):
        _, _, leaf = _two_tile_fixture()
        _, matrix = build_count_matrix(leaf, ["cat cat", "dog"], ngram_max=1)
        merged = aggregate_count_matrix(matrix, aggregation_matrix(leaf))
        with pytest.raises(ValueError):
            aggregate_count_matrix(merged, aggregation_matrix(leaf))


class TestTtfidfScores:
    def test_single_tile_constant_idf(self):
        points = [PointRecord(0.5, 0.5, text="a a a b b c")]
        bounds = infer_bounds(points)
        leaf = build_leaf_level(points, bounds, 0)
        vocab, matrix = build_count_matrix(leaf, ["a a a b b c"], ngram_max=1)
        scores = ttfidf_scores(matrix).toarray()[0]
        tf = matrix.counts.toarray()[0]
        np.testing.assert_allclose(scores, tf * np.log(2.0), rtol=1e-15)
        assert list(np.argsort(scores)) == list(np.argsort(tf))

    def test_term_in_all_tiles(self):
        _, _, leaf = _two_tile_fixture()
        _, matrix = build_count_matrix(leaf, ["shared", "shared"], ngram_max=1)
        scores = ttfidf_scores(matrix).toarray()
        np.testing.assert_allclose(scores, np.log(2.0), rtol=1e-15)

    def test_formula_evaluation(self):
        _, _, leaf = _two_tile_fixture()
        _, matrix = build_count_matrix(leaf, ["cat cat", "dog"], ngram_max=1)
        scores = ttfidf_scores(matrix).toarray()
        log3 = np.log(3.0)
        np.testing.assert_allclose(scores, [[2 * log3, 0.0], [0.0, log3]], rtol=1e-15)

    def test_zero_iff_zero_count(self):
        _, _, leaf = _two_tile_fixture()
        _, matrix = build_count_matrix(leaf, ["cat cat", "dog"], ngram_max=1)
        scores = ttfidf_scores(matrix).toarray()
        counts = matrix.counts.toarray()
        assert ((scores == 0) == (counts == 0)).all()
        assert (scores >= 0).all()


class TestTopKeywords:
    def test_max(self):
        vocab = Vocabulary.from_terms(["a", "b"])
        assert top_keywords(np.array([3.0, 1.0]), vocab, 1) == [("a", 3.0)]

    def test_lexicographic_tie_break(self):
        vocab = Vocabulary.from_terms(["b", "a"])
        assert top_keywords(np.array([2.0, 2.0]), vocab, 1) == [("a", 2.0)]

    def test_zero_scores_excluded(self):
        vocab = Vocabulary.from_terms(["a", "b", "c"])
        assert top_keywords(np.array([0.0, 1.0, 0.0]), vocab, 5) == [("b", 1.0)]

    @given(st.lists(st.integers(0, 50), min_size=1, max_size=40))
    def test_matches_full_sort_oracle(self, raw):
        scores = np.array(raw, dtype=float)
        vocab = Vocabulary.from_terms(f"t{i:02d}" for i in range(len(raw)))
        expected = sorted(
            ((t, float(s)) for t, s in zip(vocab.terms, scores) if s > 0),
            key=lambda p: (-p[1], p[0]),
        )[:5]
        assert top_keywords(scores, vocab, 5) == expected


class TestCentroidExemplars:
    def test_singleton(self):
        xy = np.array([[4.0, 5.0]])
        assert centroid_exemplars(np.array([0]), xy, 1) == [0]

    def test_brute_force_distance(self):
        # centroid (1, 10/3); points 0 and 1 tie at distance ~3.48, index wins
        xy = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 10.0]])
        assert centroid_exemplars(np.array([0, 1, 2]), xy, 1) == [0]
        assert centroid_exemplars(np.array([0, 1, 2]), xy, 3) == [0, 1, 2]

    def test_symmetric_cross_all_equidistant(self):
        xy = np.array([[0.0, 1.0], [0.0, -1.0], [1.0, 0.0], [-1.0, 0.0]])
        assert centroid_exemplars(np.array([0, 1, 2, 3]), xy, 4) == [0, 1, 2, 3]

    def test_random_against_oracle(self):
        rng = np.random.default_rng(12)
        xy = rng.normal(size=(60, 2))
        ids = np.arange(60)
        centroid = xy.mean(axis=0)
        d = np.hypot(*(xy - centroid).T)
        expected = [int(i) for i in sorted(ids, key=lambda i: (d[i], i))[:5]]
        assert centroid_exemplars(ids, xy, 5) == expected

    def test_empty_tile_rejected(self):
        with pytest.raises(ValueError):
            centroid_exemplars(np.array([], dtype=int), np.zeros((0, 2)), 1)


def brute_force_keywords(points, texts, bounds, depth, k=5, ngram_max=2):
    """Plain TF-IDF over meta-documents rebuilt from raw text at one depth."""
    tiles: dict[tuple[int, int], Counter] = {}
    for p, text in zip(points, texts):
        key = point_to_tile(p, bounds, depth)
        tiles.setdefault((key.ix, key.iy), Counter()).update(tokenize(text, ngram_max))
    n_tiles = len(tiles)
    df: Counter = Counter()
    for counts in tiles.values():
        df.update(counts.keys())
    result = {}
    for tile_key, counts in tiles.items():
        scored = [(term, tf * float(np.log1p(n_tiles / df[term]))) for term, tf in counts.items()]
        scored.sort(key=lambda p: (-p[1], p[0]))
        result[tile_key] = scored[:k]
    return result


class TestHierarchicalKeywordOracle:
    def test_keywords_match_plain_tfidf_at_every_level(self):
        corpus = make_cluster_corpus(
            [(0.15, 0.2), (0.75, 0.3), (0.45, 0.8), (0.85, 0.85)],
            CLUSTER_VOCABS[:4],
            n_per_cluster=80,
            sigma=0.06,
            seed=3,
        )
        texts = [p.text for p in corpus]
        bounds = infer_bounds(corpus)
        level = build_leaf_level(corpus, bounds, 4)
        vocab, matrix = build_count_matrix(level, texts)
        for depth in (4, 3, 2, 1):
            if depth != level.level:
                agg = aggregation_matrix(level)
                matrix = aggregate_count_matrix(matrix, agg)
                level = aggregate_level(level, agg)
            summaries = keyword_summaries(level, matrix, vocab)
            expected = brute_force_keywords(corpus, texts, bounds, depth)
            assert len(summaries) == len(expected)
            for summary in summaries:
                want = expected[(summary.key.ix, summary.key.iy)]
                assert [t for t, _ in summary.keywords] == [t for t, _ in want]
                np.testing.assert_allclose(
                    [s for _, s in summary.keywords], [s for _, s in want], rtol=1e-12
                )

    def test_determinism(self):
        corpus = make_cluster_corpus([(0.3, 0.3), (0.7, 0.7)], CLUSTER_VOCABS[:2], 50, seed=6)
        bounds = infer_bounds(corpus)

        def run():
            leaf = build_leaf_level(corpus, bounds, 3)
            vocab, matrix = build_count_matrix(leaf, [p.text for p in corpus])
            return keyword_summaries(leaf, matrix, vocab)

        assert run() == run()


class TestExemplarSummaries:
    def test_each_tile_gets_nearest_points(self, unit_bounds):
        rng = np.random.default_rng(9)
        xy = rng.uniform(0.02, 0.98, size=(120, 2))
        level = build_leaf_level(xy, unit_bounds, 2)
        summaries = exemplar_summaries(level, xy, k=3)
        members = level.points_by_tile()
        for row, summary in enumerate(summaries):
            assert summary.exemplars == centroid_exemplars(members[row], xy, 3)
            assert not summary.keywords

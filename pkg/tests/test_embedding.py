from __future__ import annotations

import random
import string

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from opendataqa.embedding import (
    CachingEmbedder,
    EmbeddingCache,
    HashedNgramEmbedder,
    Index,
    build_index,
    cosine,
    embed,
)
from opendataqa.errors import DimMismatch, EmptyIndex, EmptyText, ZeroVector

from .oracles import brute_knn, cosine_pure


@pytest.fixture(scope="module")
def embedder() -> HashedNgramEmbedder:
    return HashedNgramEmbedder()


class TestCosine:
    def test_parallel(self):
        assert cosine([1.0, 0.0], [1.0, 0.0]) == pytest.approx(1.0, abs=1e-9)

    def test_orthogonal(self):
        assert cosine([1.0, 0.0], [0.0, 1.0]) == pytest.approx(0.0, abs=1e-9)

    def test_hand_computed(self):
        # 32 / (sqrt(14) * sqrt(77))
        assert cosine([1, 2, 3], [4, 5, 6]) == pytest.approx(0.974631846, abs=1e-9)

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            cosine([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            cosine([0.0, 0.0], [1.0, 0.0])

    @given(
        st.lists(st.floats(-100, 100), min_size=2, max_size=16),
        st.lists(st.floats(-100, 100), min_size=2, max_size=16),
    )
    def test_matches_pure_python(self, a, b):
        n = min(len(a), len(b))
        a, b = a[:n], b[:n]
        if max(map(abs, a)) < 1e-100 or max(map(abs, b)) < 1e-100:
            return  # squared norm underflows
        # summation order differs between numpy and the sequential oracle
        assert cosine(a, b) == pytest.approx(cosine_pure(a, b), abs=1e-7)
        assert -1.0 - 1e-9 <= cosine(a, b) <= 1.0 + 1e-9


class TestLocalEmbedder:
    def test_deterministic(self, embedder):
        a = embed(embedder, "urban cycling")
        b = embed(embedder, "urban cycling")
        assert np.array_equal(a, b)

    def test_self_similarity_is_one(self, embedder):
        v = embed(embedder, "urban cycling")
        assert cosine(v, v) == pytest.approx(1.0, abs=1e-9)

    def test_unit_norm(self, embedder):
        v = embed(embedder, "Velozählstellen der Stadt")
        assert float(np.linalg.norm(v)) == pytest.approx(1.0, abs=1e-6)

    def test_empty_text_rejected(self, embedder):
        with pytest.raises(EmptyText):
            embed(embedder, "   ")

    def test_full_text_query_hits_its_document(self, embedder):
        rng = random.Random(3)
        docs = {}
        for i in range(20):
            words = [
                "".join(rng.choices(string.ascii_lowercase, k=rng.randint(3, 9)))
                for _ in range(rng.randint(5, 30))
            ]
            docs[f"doc{i:02d}"] = " ".join(words)
        index = build_index(docs, embedder)
        for doc_id, text in docs.items():
            hits = index.knn(embed(embedder, text), 1)
            assert hits[0].dataset_id == doc_id


class TestIndex:
    def random_corpus(self, rng: random.Random, n: int, dim: int = 8):
        return {
            f"id{i:03d}": [rng.gauss(0, 1) for _ in range(dim)] for i in range(n)
        }

    def test_single_entry(self):
        index = Index()
        index.add("only", np.array([1.0, 0.0]))
        hits = index.knn(np.array([0.5, 0.5]), 1)
        assert [h.dataset_id for h in hits] == ["only"]

    def test_k_clamped_to_n(self):
        index = Index()
        for i in range(3):
            index.add(f"d{i}", np.array([1.0, float(i)]))
        assert len(index.knn(np.array([1.0, 1.0]), 5)) == 3

    def test_empty_index(self):
        with pytest.raises(EmptyIndex):
            Index().knn(np.array([1.0]), 1)

    def test_matches_brute_force_oracle(self):
        rng = random.Random(23)
        for trial in range(25):
            corpus = self.random_corpus(rng, rng.randint(1, 40))
            index = Index()
            for doc_id, vec in corpus.items():
                index.add(doc_id, np.array(vec))
            query = np.array([rng.gauss(0, 1) for _ in range(8)])
            for k in (1, 3, len(corpus)):
                got = index.knn(query, k)
                want = brute_knn(corpus, list(query), k)
                assert [h.dataset_id for h in got] == [w[0] for w in want]
                for h, w in zip(got, want):
                    assert h.score == pytest.approx(w[1], abs=1e-9)

    def test_insertion_order_invariance(self):
        rng = random.Random(5)
        corpus = self.random_corpus(rng, 20)
        query = np.array([rng.gauss(0, 1) for _ in range(8)])
        orders = [list(corpus), list(reversed(list(corpus)))]
        results = []
        for order in orders:
            index = Index()
            for doc_id in order:
                index.add(doc_id, np.array(corpus[doc_id]))
            results.append([h.dataset_id for h in index.knn(query, 10)])
        assert results[0] == results[1]

    def test_tie_break_by_ascending_id(self):
        index = Index()
        index.add("zeta", np.array([1.0, 0.0]))
        index.add("alpha", np.array([2.0, 0.0]))  # same direction, same cosine
        hits = index.knn(np.array([1.0, 0.0]), 2)
        assert [h.dataset_id for h in hits] == ["alpha", "zeta"]

    def test_scores_non_increasing(self):
        rng = random.Random(9)
        corpus = self.random_corpus(rng, 30)
        index = Index()
        for doc_id, vec in corpus.items():
            index.add(doc_id, np.array(vec))
        hits = index.knn(np.array([rng.gauss(0, 1) for _ in range(8)]), 30)
        scores = [h.score for h in hits]
        assert scores == sorted(scores, reverse=True)

    def test_self_query_returns_self(self):
        rng = random.Random(31)
        corpus = self.random_corpus(rng, 25)
        index = Index()
        for doc_id, vec in corpus.items():
            index.add(doc_id, np.array(vec))
        for doc_id, vec in corpus.items():
            assert index.knn(np.array(vec), 1)[0].dataset_id == doc_id


class TestCache:
    def test_round_trip(self, tmp_path, embedder):
        cache = EmbeddingCache(tmp_path)
        vec = embed(embedder, "hello world")
        cache.put(embedder.provider_id, "hello world", vec)
        back = cache.get(embedder.provider_id, "hello world")
        assert back is not None
        assert np.allclose(back, vec)

    def test_miss_returns_none(self, tmp_path):
        assert EmbeddingCache(tmp_path).get("p", "missing") is None

    def test_caching_embedder_avoids_recompute(self, tmp_path):
        calls = []

        class CountingEmbedder:
            provider_id = "counting"
            dim = 4

            def embed(self, text):
                calls.append(text)
                return np.array([1.0, 2.0, 3.0, 4.0], dtype=np.float32)

        wrapped = CachingEmbedder(CountingEmbedder(), EmbeddingCache(tmp_path))
        embed(wrapped, "same text")
        embed(wrapped, "same text")
        assert calls == ["same text"]

    def test_cache_file_format_little_endian_f32(self, tmp_path, embedder):
        cache = EmbeddingCache(tmp_path)
        vec = embed(embedder, "format check")
        cache.put(embedder.provider_id, "format check", vec)
        files = list(tmp_path.rglob("*.vec"))
        assert len(files) == 1
        blob = files[0].read_bytes()
        dim = int.from_bytes(blob[:4], "little")
        assert dim == embedder.dim
        assert len(blob) == 4 + 4 * dim

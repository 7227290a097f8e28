import math

import numpy as np
import pytest

from audit_triage.textprep import TokenList, build_vocabulary
from audit_triage.vectors import (EmbeddingConfig, SparseVector, cosine_similarity,
                                  count_vectorize, doc_vector, load_embeddings,
                                  save_embeddings, train_embeddings)


@pytest.fixture
def small_vocab():
    return build_vocabulary([TokenList(["belt", "belt", "motor"])])


class TestCountVectorize:
    def test_counts(self, small_vocab):
        sv = count_vectorize(TokenList(["belt", "belt", "motor"]), small_vocab)
        assert dict(zip(sv.indices.tolist(), sv.counts.tolist())) == {0: 2.0, 1: 1.0}

    def test_out_of_vocabulary_ignored(self, small_vocab):
        sv = count_vectorize(TokenList(["pump", "valve"]), small_vocab)
        assert sv.nnz == 0

    def test_empty_tokens(self, small_vocab):
        assert count_vectorize(TokenList([]), small_vocab).nnz == 0

    def test_component_sum_equals_in_vocab_tokens(self, small_vocab):
        rng = np.random.default_rng(1)
        words = ["belt", "motor", "pump", "guard"]
        for _ in range(50):
            tokens = [words[int(i)] for i in rng.integers(0, len(words), int(rng.integers(0, 20)))]
            sv = count_vectorize(TokenList(tokens), small_vocab)
            expected = sum(1 for t in tokens if t in small_vocab.index)
            assert float(sv.counts.sum()) == expected


class TestCosine:
    def test_identical_vectors(self):
        v = np.array([0.3, -1.2, 4.0])
        assert cosine_similarity(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_vectors(self):
        assert cosine_similarity([1.0, 0.0], [0.0, 5.0]) == 0.0

    def test_hand_computed_value(self):
        # dot([1,1],[1,0]) / (sqrt(2)*1) = 1/sqrt(2)
        assert cosine_similarity([1.0, 1.0], [1.0, 0.0]) == pytest.approx(
            math.sqrt(0.5), abs=1e-9)

    def test_zero_vector_rule(self):
        assert cosine_similarity([0.0, 0.0], [1.0, 2.0]) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            cosine_similarity([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_sparse_matches_dense_oracle(self, small_vocab):
        rng = np.random.default_rng(2)
        for _ in range(100):
            a = SparseVector(8, *_random_sparse(rng, 8))
            b = SparseVector(8, *_random_sparse(rng, 8))
            got = cosine_similarity(a, b)
            want = cosine_similarity(a.to_dense(), b.to_dense())
            assert got == pytest.approx(want, abs=1e-12)

    def test_symmetry_and_scale_invariance(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            a = rng.normal(size=6)
            b = rng.normal(size=6)
            c = float(rng.uniform(0.01, 100))
            assert cosine_similarity(a, b) == cosine_similarity(b, a)
            assert cosine_similarity(c * a, b) == pytest.approx(cosine_similarity(a, b), abs=1e-9)
            assert abs(cosine_similarity(a, b)) <= 1.0 + 1e-12


def _random_sparse(rng, dim):
    nnz = int(rng.integers(0, dim))
    idx = np.sort(rng.choice(dim, size=nnz, replace=False))
    return idx, rng.integers(1, 5, size=nnz).astype(float)


def _sublanguage_corpus():
    rng = np.random.default_rng(0)
    group_a = [f"a{i}" for i in range(5)]
    group_b = [f"b{i}" for i in range(5)]
    docs = []
    for _ in range(200):
        docs.append(TokenList([group_a[int(i)] for i in rng.integers(0, 5, 6)]))
        docs.append(TokenList([group_b[int(i)] for i in rng.integers(0, 5, 6)]))
    return group_a, group_b, docs


class TestTrainEmbeddings:
    def test_cooccurring_tokens_end_up_closer(self):
        group_a, group_b, docs = _sublanguage_corpus()
        model = train_embeddings(docs, EmbeddingConfig(dim=16, epochs=30, seed=1,
                                                       batch_size=256))
        vec = {t: model.matrix[model.vocab.index[t]] for t in group_a + group_b}
        within, across = [], []
        for i, a in enumerate(group_a):
            for b in group_a[i + 1:]:
                within.append(cosine_similarity(vec[a], vec[b]))
            for b in group_b:
                across.append(cosine_similarity(vec[a], vec[b]))
        for i, a in enumerate(group_b):
            for b in group_b[i + 1:]:
                within.append(cosine_similarity(vec[a], vec[b]))
        assert np.mean(within) > np.mean(across)

    def test_single_repeated_token_rejected(self):
        docs = [TokenList(["belt", "belt", "belt"])]
        with pytest.raises(ValueError):
            train_embeddings(docs, EmbeddingConfig(dim=8, epochs=1, seed=0))

    def test_deterministic(self):
        _, _, docs = _sublanguage_corpus()
        cfg = EmbeddingConfig(dim=8, epochs=2, seed=9)
        a = train_embeddings(docs[:50], cfg)
        b = train_embeddings(docs[:50], cfg)
        assert np.array_equal(a.matrix, b.matrix)
        assert a.loss_by_epoch == b.loss_by_epoch

    def test_objective_reported_and_mostly_decreasing(self):
        _, _, docs = _sublanguage_corpus()
        model = train_embeddings(docs, EmbeddingConfig(dim=16, epochs=6, seed=4,
                                                       batch_size=256))
        losses = model.loss_by_epoch
        assert len(losses) == 6
        for earlier, later in zip(losses, losses[1:]):
            assert later <= earlier * 1.05

    def test_dim_must_be_at_least_two(self):
        _, _, docs = _sublanguage_corpus()
        with pytest.raises(ValueError):
            train_embeddings(docs[:10], EmbeddingConfig(dim=1, epochs=1, seed=0))


class TestDocVector:
    @pytest.fixture
    def model(self):
        _, _, docs = _sublanguage_corpus()
        return train_embeddings(docs[:80], EmbeddingConfig(dim=8, epochs=2, seed=2))

    def test_single_token_is_its_row(self, model):
        v = doc_vector(TokenList(["a0"]), model)
        assert np.array_equal(v, model.matrix[model.vocab.index["a0"]])

    def test_repeated_token_unchanged(self, model):
        v1 = doc_vector(TokenList(["a0"]), model)
        v2 = doc_vector(TokenList(["a0", "a0"]), model)
        assert np.allclose(v1, v2)

    def test_out_of_vocabulary_gives_zero(self, model):
        assert not doc_vector(TokenList(["zz"]), model).any()


def test_save_load_roundtrip_bit_exact(tmp_path):
    _, _, docs = _sublanguage_corpus()
    model = train_embeddings(docs[:60], EmbeddingConfig(dim=12, epochs=2, seed=7))
    path = tmp_path / "embeddings.txt"
    save_embeddings(model, path)
    loaded = load_embeddings(path)
    assert np.array_equal(loaded.matrix, model.matrix)
    assert loaded.vocab.index == model.vocab.index
    assert loaded.vocab.frequency == model.vocab.frequency
    assert loaded.config == model.config
    assert loaded.loss_by_epoch == model.loss_by_epoch

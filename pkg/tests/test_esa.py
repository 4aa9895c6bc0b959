import io
import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, strategies as st

from esaretro.corpus import Corpus, Document, parse_dump
from esaretro.esa import (
    ESAVectorizer,
    SparseVector,
    WordConceptMatrix,
    build_tfidf,
    concept_vector,
    concepts_for_word,
    cosine,
    embed_text,
    load_matrix,
    save_matrix,
)
from esaretro.exceptions import EmptyCorpus, UnknownConcept


def corpus(**docs):
    return Corpus(tuple(Document(t, tuple(text.split())) for t, text in docs.items()))


def appendix_corpus():
    # w1 in all three docs would get idf 0, so add a fourth filler document
    return corpus(
        doc1="w1 w2 w3",
        doc2="w1 w2 w4",
        doc3="w1 w3 w4",
        doc4="other",
    )


def test_two_document_weights():
    m = build_tfidf(corpus(d1="a a b", d2="b"))
    a, b = m.vocabulary["a"], m.vocabulary["b"]
    assert m.weights[a, 0] == 2 * math.log(2)
    assert m.weights[a, 1] == 0
    assert m.weights[b].nnz == 0
    # single occurrence: tf = 1
    m1 = build_tfidf(corpus(d1="a b", d2="b"))
    assert m1.weights[m1.vocabulary["a"], 0] == math.log(2)


def test_sublinear_tf():
    m = build_tfidf(corpus(d1="a a b", d2="b"), sublinear_tf=True)
    assert m.weights[m.vocabulary["a"], 0] == pytest.approx((1 + math.log(2)) * math.log(2))


def test_min_weight_prunes():
    m = build_tfidf(corpus(d1="a a b c", d2="b", d3="b"), min_weight=2.0)
    assert m.weights[m.vocabulary["a"], 0] == pytest.approx(2 * math.log(3))
    assert m.weights[m.vocabulary["c"]].nnz == 0


def test_empty_corpus():
    with pytest.raises(EmptyCorpus):
        build_tfidf(Corpus(()))


def test_df_equal_n_gives_empty_row():
    m = build_tfidf(corpus(d1="x y", d2="x"))
    assert len(concepts_for_word(m, "x")) == 0


def test_appendix_supports():
    m = build_tfidf(appendix_corpus())
    w2 = concepts_for_word(m, "w2")
    assert [m.concepts[j] for j in w2.indices] == ["doc1", "doc2"]
    c1 = concept_vector(m, "doc1")
    assert {m.words[i] for i in c1.indices} == {"w1", "w2", "w3"}
    assert len(concepts_for_word(m, "zzzz")) == 0


def test_appendix_query_centroid():
    m = build_tfidf(appendix_corpus())
    emb = embed_text(m, ["w1", "w2", "w3", "w4"])
    W = m.weights.toarray()
    rows = [m.vocabulary[w] for w in ["w1", "w2", "w3", "w4"]]
    # weight on doc1 = (tf_1^1 + tf_2^1 + tf_3^1) / k
    assert emb.vector.toarray()[0] == pytest.approx(W[rows, 0].sum() / 4)
    assert emb.n_used == 4 and emb.n_oov == 0


def test_unknown_concept():
    with pytest.raises(UnknownConcept):
        concept_vector(build_tfidf(corpus(d1="a")), "nope")


def test_empty_document_concept():
    m = build_tfidf(corpus(d1="a b", d2=""))
    assert len(concept_vector(m, "d2")) == 0


def test_support_partition():
    m = build_tfidf(appendix_corpus())
    assert sum(len(concept_vector(m, c)) for c in m.concepts) == m.nnz


def test_embed_single_and_repeated():
    m = build_tfidf(appendix_corpus())
    single = embed_text(m, ["w3"]).vector
    assert single == concepts_for_word(m, "w3")
    assert cosine(embed_text(m, ["w3", "w3"]).vector, single) == pytest.approx(1.0)


def test_embed_all_oov():
    m = build_tfidf(appendix_corpus())
    emb = embed_text(m, ["nope", "zip"])
    assert len(emb.vector) == 0 and emb.n_oov == 2
    assert embed_text(m, []).n_oov == 0


def test_cosine_examples():
    u = SparseVector([0], [3.0], 2)
    v = SparseVector([0, 1], [4.0, 3.0], 2)
    assert cosine(u, v) == pytest.approx(12 / 15)
    assert cosine(SparseVector([0], [1.0], 2), SparseVector([1], [1.0], 2)) == 0.0
    assert cosine(v, v) == pytest.approx(1.0)
    assert cosine(SparseVector.empty(2), v) == 0.0
    assert cosine(np.array([3.0, 0]), np.array([4.0, 3.0])) == pytest.approx(0.8)


@given(
    st.lists(st.floats(-10, 10, allow_subnormal=False), min_size=3, max_size=3),
    st.lists(st.floats(-10, 10, allow_subnormal=False), min_size=3, max_size=3),
    st.floats(0.01, 100),
)
def test_cosine_symmetric_and_scale_invariant(a, b, s):
    u, v = SparseVector.from_dense(a), SparseVector.from_dense(b)
    assert cosine(u, v) == pytest.approx(cosine(v, u), abs=1e-12)
    assert cosine(u.scale(s), v) == pytest.approx(cosine(u, v), abs=1e-9)
    assert -1.0 <= cosine(u, v) <= 1.0


def test_sparse_vector_invariants():
    with pytest.raises(ValueError):
        SparseVector([1, 0], [1.0, 2.0], 3)
    with pytest.raises(ValueError):
        SparseVector([0], [0.0], 3)
    with pytest.raises(ValueError):
        SparseVector([0], [math.inf], 3)


words = st.sampled_from(["ant", "bee", "cow", "dog", "eel", "fox"])
doc_lists = st.lists(st.lists(words, max_size=8), min_size=1, max_size=6)


@given(doc_lists)
def test_row_column_consistency(texts):
    c = Corpus(tuple(Document(f"d{i}", tuple(t)) for i, t in enumerate(texts)))
    m = build_tfidf(c)
    assert np.all(m.weights.data > 0)
    for w in m.words:
        row = concepts_for_word(m, w)
        for j in range(len(m.concepts)):
            col = concept_vector(m, m.concepts[j])
            assert (j in row.indices) == (m.vocabulary[w] in col.indices)
    for w in m.words:
        assert embed_text(m, [w]).vector == concepts_for_word(m, w)
    # nonnegative vectors: cosines in [0, 1]
    for a in m.words:
        for b in m.words:
            assert 0.0 <= cosine(concepts_for_word(m, a), concepts_for_word(m, b)) <= 1.0


@given(doc_lists)
def test_matrix_roundtrip(texts):
    c = Corpus(tuple(Document(f"d {i}", tuple(t)) for i, t in enumerate(texts)))
    m = build_tfidf(c)
    buf = io.StringIO()
    save_matrix(m, buf)
    loaded = load_matrix(io.StringIO(buf.getvalue()))
    assert loaded.words == m.words and loaded.concepts == m.concepts
    np.testing.assert_allclose(loaded.weights.toarray(), m.weights.toarray(), rtol=1e-11)
    again = io.StringIO()
    save_matrix(loaded, again)
    assert again.getvalue() == buf.getvalue()


def test_matrix_header_and_format():
    m = build_tfidf(corpus(d1="a a b", d2="b"))
    buf = io.StringIO()
    save_matrix(m, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "#esa v1 words=2 concepts=2"
    assert f"a\td1\t{2 * math.log(2)!r}" in lines
    assert "#word\tb" in lines


def test_load_rejects_bad_header():
    with pytest.raises(ValueError):
        load_matrix(["nope\n"])
    with pytest.raises(ValueError):
        load_matrix(["#esa v1 words=1 concepts=1\n", "a\tb\n"])


def test_vectorizer_matches_functions(fixture_dir):
    c = parse_dump(open(fixture_dir / "dump.jsonl", encoding="utf-8"))
    vec = ESAVectorizer().fit(c)
    X = vec.transform(["Information retrieval in search engines", ["tiger"]])
    assert X.shape == (2, len(c))
    expected = embed_text(vec.matrix_, ["information", "retrieval", "search", "engines"]).vector
    assert SparseVector.from_sparse(X[0]) == expected
    assert SparseVector.from_sparse(X[1]) == concepts_for_word(vec.matrix_, "tiger")
    assert list(vec.get_feature_names_out()[:2]) == ["Computer", "Software"]
    assert vec.similarity("tiger", "lion") > vec.similarity("tiger", "piano")

import numpy as np
import pytest
from hypothesis import given, strategies as st

from esaretro.esa import SparseVector, WordConceptMatrix
from esaretro.evaluate import (
    AnalogyQuad,
    EvalReport,
    ToeflQuestion,
    WordPair,
    eval_synrel,
    eval_toefl,
    eval_wordsim,
    matrix_embedder,
    parse_synrel,
    parse_toefl,
    parse_wordsim,
    predict_analogy,
    spearman,
    vector_embedder,
)
from esaretro.exceptions import DegenerateInput, LengthMismatch, MalformedLine, TooFewPairs
from esaretro.retrofit import VectorSet

from oracles import brute_spearman


def test_spearman_examples():
    assert spearman([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)
    assert spearman([1, 2, 3, 4], [4, 3, 2, 1]) == pytest.approx(-1.0)
    assert spearman([1, 2, 3, 4, 5], [2, 1, 4, 3, 5]) == pytest.approx(brute_spearman([1, 2, 3, 4, 5], [2, 1, 4, 3, 5]))
    assert spearman([1, 2, 3, 4, 5], [2, 1, 4, 3, 5]) == pytest.approx(0.8, abs=1e-12)


def test_spearman_errors():
    with pytest.raises(LengthMismatch):
        spearman([1, 2], [1, 2, 3])
    with pytest.raises(LengthMismatch):
        spearman([1], [1])
    with pytest.raises(DegenerateInput):
        spearman([1, 1, 1], [1, 2, 3])


int_lists = st.integers(2, 10).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 4), min_size=n, max_size=n),
                        st.lists(st.integers(0, 4), min_size=n, max_size=n))
).filter(lambda xy: len(set(xy[0])) > 1 and len(set(xy[1])) > 1)


@given(int_lists)
def test_spearman_symmetric_and_rank_invariant(xy):
    x, y = xy
    r = spearman(x, y)
    assert r == pytest.approx(spearman(y, x), abs=1e-12)
    assert r == pytest.approx(spearman([v ** 3 + 5 for v in x], np.exp(y)), abs=1e-12)
    assert -1 <= r <= 1


def emb(table):
    return lambda w: None if w not in table else np.asarray(table[w], dtype=float)


def test_wordsim_all_oov():
    with pytest.raises(TooFewPairs) as err:
        eval_wordsim(emb({}), [WordPair("a", "b", 1.0), WordPair("c", "d", 2.0)])
    assert err.value.report.oov_skipped == 2 == err.value.report.items_total


def test_wordsim_perfect_rank():
    # cosines 1, cos(45deg), 0 ordered like human scores
    table = {"x": [1, 0], "y": [1, 0], "z": [1, 1], "w": [0, 1]}
    pairs = [WordPair("x", "y", 9.0), WordPair("x", "z", 5.0), WordPair("x", "w", 1.0), WordPair("x", "nope", 3.0)]
    r = eval_wordsim(emb(table), pairs)
    assert r.value == pytest.approx(1.0) and r.value_pct == pytest.approx(100.0)
    assert (r.items_total, r.items_scored, r.oov_skipped) == (4, 3, 1)


def test_wordsim_scale_invariant():
    rng = np.random.default_rng(1)
    table = {w: rng.normal(size=4) for w in "abcdef"}
    pairs = [WordPair(a, b, float(rng.random())) for a, b in zip("abcde", "bcdef")]
    base = eval_wordsim(emb(table), pairs).value
    scaled = eval_wordsim(emb({k: 3.5 * v for k, v in table.items()}), pairs).value
    assert base == pytest.approx(scaled, abs=1e-12)


def test_zero_vector_counts_as_oov():
    table = {"a": [1, 0], "b": [0, 0], "c": [1, 0.5], "d": [0, 1]}
    r = eval_wordsim(emb(table), [WordPair("a", "b", 1), WordPair("a", "c", 2), WordPair("c", "d", 3)])
    assert r.oov_skipped == 1


def test_toefl():
    table = {"t": [1, 0, 0], "good": [1, 0, 0], "o1": [0, 1, 0], "o2": [0, 0, 1], "o3": [0, 1, 1]}
    q_right = ToeflQuestion("t", ("o1", "good", "o2", "o3"), 1)
    q_wrong = ToeflQuestion("t", ("o1", "good", "o2", "o3"), 0)
    q_oov = ToeflQuestion("missing", ("o1", "good", "o2", "o3"), 1)
    r = eval_toefl(emb(table), [q_right, q_wrong, q_oov])
    assert r.value == pytest.approx(0.5)
    assert (r.items_total, r.items_scored, r.oov_skipped) == (3, 2, 1)


def test_toefl_tie_lowest_index():
    table = {"t": [1, 0], "a": [0, 1], "b": [0, 2], "c": [0, 3], "d": [0, 4]}
    r = eval_toefl(emb(table), [ToeflQuestion("t", ("a", "b", "c", "d"), 0)])
    assert r.value == 1.0


def test_synrel_example():
    vs = VectorSet.from_dict({"a": [1, 0], "b": [0, 1], "c": [1, 1], "d": [0, 2]})
    assert predict_analogy(vs, "a", "b", "c") == "d"
    r = eval_synrel(vs, [AnalogyQuad("a", "b", "c", "d"), AnalogyQuad("a", "zz", "c", "d")])
    assert r.value == 1.0 and r.items_scored == 1 and r.oov_skipped == 1


def test_synrel_a_equals_b_is_nearest_of_c():
    vs = VectorSet.from_dict({"a": [1, 0], "c": [1, 1], "e": [1, 0.9], "f": [0, 1]})
    assert predict_analogy(vs, "a", "a", "c") == "e"


def test_synrel_lexicographic_tie():
    vs = VectorSet.from_dict({"a": [1, 0], "b": [0, 1], "c": [1, 1], "zz": [0, 3], "yy": [0, 1]})
    assert predict_analogy(vs, "a", "b", "c") == "yy"


def test_synrel_sparse_matrix():
    import scipy.sparse as sp

    m = WordConceptMatrix(sp.csr_matrix([[1.0, 0], [0, 1.0], [1.0, 1.0], [0, 2.0]]), list("abcd"), ["x", "y"])
    assert eval_synrel(m, [AnalogyQuad("a", "b", "c", "d")]).value == 1.0


def test_matrix_embedder_lowercases():
    import scipy.sparse as sp

    m = WordConceptMatrix(sp.csr_matrix([[1.0, 0], [0, 0]]), ["cat", "the"], ["x", "y"])
    e = matrix_embedder(m)
    assert isinstance(e("Cat"), SparseVector)
    assert e("the") is None and e("dog") is None


def test_vector_embedder():
    vs = VectorSet.from_dict({"a": [1.0, 2.0], "z": [0.0, 0.0]})
    e = vector_embedder(vs)
    assert np.array_equal(e("a"), [1.0, 2.0]) and e("z") is None and e("b") is None


def test_report_json():
    r = EvalReport("wordsim", 0.5, 10, 8, 2)
    assert r.to_dict() == {"metric": "wordsim", "value_pct": 50.0, "items_total": 10, "items_scored": 8, "oov_skipped": 2}
    assert "50.00" in r.table()


def test_parsers():
    assert parse_wordsim(["# c\n", "a\tb\t1.5\n", "\n"]) == [WordPair("a", "b", 1.5)]
    for bad in (["a b 1\n"], ["a\tb\tx\n"], ["a\tb\t1\n", "b\ta\t2\n"], ["a\tb\tnan\n"]):
        with pytest.raises(MalformedLine):
            parse_wordsim(bad)
    qs = parse_toefl(["rug: sofa ottoman carpet hallway\n", "answer: 2\n"])
    assert qs == [ToeflQuestion("rug", ("sofa", "ottoman", "carpet", "hallway"), 2)]
    for bad in (["rug: a b c\n", "answer: 0\n"], ["rug: a b c d\n"], ["rug: a b c d\n", "answer: 4\n"],
                ["rug: a a c d\n", "answer: 1\n"], ["rug: a b c d\n", "ans 1\n"]):
        with pytest.raises(MalformedLine):
            parse_toefl(bad)
    assert parse_synrel(["walk walked run ran\n"]) == [AnalogyQuad("walk", "walked", "run", "ran")]
    with pytest.raises(MalformedLine) as err:
        parse_synrel(["walk walked run ran\n", "a b c\n"])
    assert err.value.line_no == 2

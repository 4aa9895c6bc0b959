"""Word/concept TF-IDF matrix and ESA embeddings.

Rows of the matrix are words, columns are concepts (article titles). A row is
a word's vector in concept space; a column is a concept's vector in word space.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .corpus import DEFAULT_STOPWORDS, Corpus, Document, tokenize
from .exceptions import EmptyCorpus, UnknownConcept

MATRIX_MAGIC = "#esa v1"


@dataclass(frozen=True, eq=False)
class SparseVector:
    """Sorted ``(index, weight)`` pairs over a space of ``size`` dimensions."""

    indices: np.ndarray
    values: np.ndarray
    size: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.float64)
        if idx.shape != val.shape or idx.ndim != 1:
            raise ValueError("indices and values must be 1-D and equally long")
        if idx.size and (np.any(np.diff(idx) <= 0) or idx[0] < 0 or idx[-1] >= self.size):
            raise ValueError("indices must be strictly increasing and within range")
        if not np.all(np.isfinite(val)) or np.any(val == 0):
            raise ValueError("weights must be finite and nonzero")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    @classmethod
    def empty(cls, size):
        return cls(np.empty(0, np.int64), np.empty(0), size)

    @classmethod
    def from_dense(cls, x):
        x = np.asarray(x, dtype=np.float64).ravel()
        nz = np.flatnonzero(x)
        return cls(nz, x[nz], x.size)

    @classmethod
    def from_sparse(cls, row):
        """From a 1 x n scipy sparse row (or a column, which is flattened)."""
        row = sp.csr_matrix(row.reshape(1, -1))
        row.sum_duplicates()
        row.eliminate_zeros()
        row.sort_indices()
        return cls(row.indices.copy(), row.data.copy(), row.shape[1])

    def __len__(self):
        return int(self.indices.size)

    def __eq__(self, other):
        if not isinstance(other, SparseVector):
            return NotImplemented
        return (
            self.size == other.size
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
        )

    def items(self):
        return list(zip(self.indices.tolist(), self.values.tolist()))

    def norm(self):
        return float(np.sqrt(np.dot(self.values, self.values)))

    def dot(self, other: "SparseVector") -> float:
        _, i, j = np.intersect1d(self.indices, other.indices, assume_unique=True, return_indices=True)
        return float(np.dot(self.values[i], other.values[j]))

    def scale(self, a):
        if a == 0:
            return SparseVector.empty(self.size)
        return SparseVector(self.indices, self.values * a, self.size)

    def toarray(self):
        out = np.zeros(self.size)
        out[self.indices] = self.values
        return out

    def to_sparse(self):
        return sp.csr_matrix(
            (self.values, self.indices, [0, self.indices.size]), shape=(1, self.size)
        )


def cosine(u, v) -> float:
    """Cosine similarity; 0.0 when either vector has zero norm.

    Accepts :class:`SparseVector` pairs or anything numpy can flatten.
    """
    if isinstance(u, SparseVector) and isinstance(v, SparseVector):
        nu, nv = u.norm(), v.norm()
        if nu == 0 or nv == 0:
            return 0.0
        dot = u.dot(v)
    else:
        u = u.toarray() if isinstance(u, SparseVector) or sp.issparse(u) else u
        v = v.toarray() if isinstance(v, SparseVector) or sp.issparse(v) else v
        u = np.asarray(u, dtype=np.float64).ravel()
        v = np.asarray(v, dtype=np.float64).ravel()
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        if nu == 0 or nv == 0:
            return 0.0
        dot = float(u @ v)
    # rounding can push |cos| a hair past 1
    return float(np.clip(dot / (nu * nv), -1.0, 1.0))


class WordConceptMatrix:
    """Sparse TF-IDF weights, ``weights[i, j]`` for word ``i`` in concept ``j``."""

    def __init__(self, weights, words: Sequence[str], concepts: Sequence[str]):
        w = sp.csr_matrix(weights, dtype=np.float64)
        w.sum_duplicates()
        w.eliminate_zeros()
        w.sort_indices()
        if w.shape != (len(words), len(concepts)):
            raise ValueError(f"weights shape {w.shape} does not match {len(words)} words x {len(concepts)} concepts")
        if not np.all(np.isfinite(w.data)):
            raise ValueError("weights must be finite")
        self.weights = w
        self.words = list(words)
        self.concepts = list(concepts)
        self.vocabulary = {t: i for i, t in enumerate(self.words)}
        self.concept_index = {t: j for j, t in enumerate(self.concepts)}
        if len(self.vocabulary) != len(self.words) or len(self.concept_index) != len(self.concepts):
            raise ValueError("words and concepts must be unique")

    @cached_property
    def by_column(self) -> sp.csc_matrix:
        c = self.weights.tocsc()
        c.sort_indices()
        return c

    @property
    def shape(self):
        return self.weights.shape

    @property
    def nnz(self):
        return int(self.weights.nnz)

    def with_weights(self, weights) -> "WordConceptMatrix":
        return WordConceptMatrix(weights, self.words, self.concepts)

    def __eq__(self, other):
        if not isinstance(other, WordConceptMatrix):
            return NotImplemented
        return (
            self.words == other.words
            and self.concepts == other.concepts
            and (self.weights != other.weights).nnz == 0
        )

    def __repr__(self):
        v, c = self.shape
        return f"WordConceptMatrix(words={v}, concepts={c}, nnz={self.nnz})"


def build_tfidf(corpus: Corpus | Iterable[Document], sublinear_tf=False, min_weight=0.0) -> WordConceptMatrix:
    """weight(i, j) = tf(i, j) * ln(N / df(i)).

    ``tf`` is the raw count, or ``1 + ln(count)`` with ``sublinear_tf``.
    Entries below ``min_weight`` are dropped (0 keeps everything nonzero).
    """
    if not isinstance(corpus, Corpus):
        corpus = Corpus(tuple(corpus))
    n_docs = len(corpus)
    if n_docs == 0:
        raise EmptyCorpus()
    vocab = corpus.vocabulary
    rows, cols = [], []
    for j, doc in enumerate(corpus):
        rows.extend(vocab[t] for t in doc.tokens)
        cols.extend([j] * len(doc.tokens))
    counts = sp.coo_matrix(
        (np.ones(len(rows)), (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
        shape=(len(vocab), n_docs),
    ).tocsr()  # duplicates are summed into raw counts
    counts.sum_duplicates()
    df = np.diff(counts.indptr)
    idf = np.log(n_docs / np.maximum(df, 1))
    tf = counts.copy()
    if sublinear_tf:
        tf.data = 1.0 + np.log(tf.data)
    weights = sp.diags(idf) @ tf
    weights = sp.csr_matrix(weights)
    if min_weight > 0:
        weights.data[np.abs(weights.data) < min_weight] = 0.0
    weights.eliminate_zeros()
    return WordConceptMatrix(weights, list(vocab), corpus.titles)


def concepts_for_word(matrix: WordConceptMatrix, word: str) -> SparseVector:
    """The word's row: its vector over concepts (empty if unknown)."""
    i = matrix.vocabulary.get(word)
    n = matrix.shape[1]
    if i is None:
        return SparseVector.empty(n)
    w = matrix.weights
    lo, hi = w.indptr[i], w.indptr[i + 1]
    return SparseVector(w.indices[lo:hi].copy(), w.data[lo:hi].copy(), n)


def concept_vector(matrix: WordConceptMatrix, concept: str) -> SparseVector:
    """The concept's column: its vector over words."""
    j = matrix.concept_index.get(concept)
    if j is None:
        raise UnknownConcept(concept)
    c = matrix.by_column
    lo, hi = c.indptr[j], c.indptr[j + 1]
    return SparseVector(c.indices[lo:hi].copy(), c.data[lo:hi].copy(), matrix.shape[0])


class TextEmbedding(NamedTuple):
    vector: SparseVector
    n_used: int
    n_oov: int


def embed_text(matrix: WordConceptMatrix, tokens: Sequence[str]) -> TextEmbedding:
    """Centroid of the concept vectors of the tokens that have one.

    Tokens that are unknown or whose row is empty count as out-of-vocabulary.
    """
    n = matrix.shape[1]
    w = matrix.weights
    rows = []
    n_oov = 0
    for t in tokens:
        i = matrix.vocabulary.get(t)
        if i is None or w.indptr[i] == w.indptr[i + 1]:
            n_oov += 1
        else:
            rows.append(i)
    if not rows:
        return TextEmbedding(SparseVector.empty(n), 0, n_oov)
    # sum with multiplicity, then divide by k
    sel = sp.csr_matrix((np.ones(len(rows)), (np.zeros(len(rows), dtype=np.int64), rows)), shape=(1, w.shape[0]))
    centroid = (sel @ w) / len(rows)
    return TextEmbedding(SparseVector.from_sparse(sp.csr_matrix(centroid)), len(rows), n_oov)


def _check_field(text, what):
    if "\t" in text or "\n" in text or "\r" in text:
        raise ValueError(f"{what} {text!r} contains a tab or newline")


def save_matrix(matrix: WordConceptMatrix, sink) -> None:
    """Write the tab-separated entry format.

    Besides the header and ``word<TAB>concept<TAB>weight`` lines, concepts are
    declared up front (``#concept`` lines) and words without stored entries
    are declared in place (``#word`` lines) so loading restores both index
    orders exactly.
    """
    v, c = matrix.shape
    sink.write(f"{MATRIX_MAGIC} words={v} concepts={c}\n")
    for title in matrix.concepts:
        _check_field(title, "concept")
        sink.write(f"#concept\t{title}\n")
    w = matrix.weights
    for i, word in enumerate(matrix.words):
        _check_field(word, "word")
        lo, hi = w.indptr[i], w.indptr[i + 1]
        if lo == hi:
            sink.write(f"#word\t{word}\n")
            continue
        for j, x in zip(w.indices[lo:hi], w.data[lo:hi]):
            sink.write(f"{word}\t{matrix.concepts[j]}\t{float(x)!r}\n")


def load_matrix(source: Iterable[str]) -> WordConceptMatrix:
    lines = iter(source)
    header = next(lines, "").rstrip("\n")
    if not header.startswith(MATRIX_MAGIC):
        raise ValueError("not an ESA matrix file (missing '#esa v1' header)")
    declared = dict(kv.split("=", 1) for kv in header[len(MATRIX_MAGIC):].split())
    concepts: dict[str, int] = {}
    words: dict[str, int] = {}
    rows, cols, data = [], [], []
    for line_no, line in enumerate(lines, start=2):
        line = line.rstrip("\n")
        if not line:
            continue
        parts = line.split("\t")
        if parts[0] == "#concept" and len(parts) == 2:
            concepts.setdefault(parts[1], len(concepts))
        elif parts[0] == "#word" and len(parts) == 2:
            words.setdefault(parts[1], len(words))
        elif line.startswith("#"):
            continue
        elif len(parts) == 3:
            word, title, x = parts
            try:
                val = float(x)
            except ValueError:
                raise ValueError(f"line {line_no}: bad weight {x!r}") from None
            rows.append(words.setdefault(word, len(words)))
            cols.append(concepts.setdefault(title, len(concepts)))
            data.append(val)
        else:
            raise ValueError(f"line {line_no}: expected word<TAB>concept<TAB>weight")
    if "words" in declared and int(declared["words"]) != len(words):
        raise ValueError(f"header declares {declared['words']} words, found {len(words)}")
    if "concepts" in declared and int(declared["concepts"]) != len(concepts):
        raise ValueError(f"header declares {declared['concepts']} concepts, found {len(concepts)}")
    weights = sp.coo_matrix((data, (rows, cols)), shape=(len(words), len(concepts)))
    return WordConceptMatrix(weights, list(words), list(concepts))


def write_matrix(matrix, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        save_matrix(matrix, f)


def read_matrix(path) -> WordConceptMatrix:
    with open(path, encoding="utf-8") as f:
        return load_matrix(f)


def is_matrix_file(path) -> bool:
    with open(path, encoding="utf-8") as f:
        return f.readline().startswith(MATRIX_MAGIC)


class ESAVectorizer(TransformerMixin, BaseEstimator):
    """Fit an ESA index on a corpus and embed texts as concept centroids.

    Parameters
    ----------
    stopwords : iterable of str or None
        Used to tokenize raw strings passed to :meth:`transform`. ``None``
        selects the bundled English list.
    sublinear_tf : bool
        Use ``1 + ln(tf)`` instead of raw counts.
    min_weight : float
        Drop stored weights below this magnitude.

    Attributes
    ----------
    matrix_ : WordConceptMatrix
    """

    def __init__(self, stopwords=None, sublinear_tf=False, min_weight=0.0):
        self.stopwords = stopwords
        self.sublinear_tf = sublinear_tf
        self.min_weight = min_weight

    def _stop(self):
        return DEFAULT_STOPWORDS if self.stopwords is None else frozenset(self.stopwords)

    def fit(self, X, y=None):
        """``X`` is a :class:`Corpus` or an iterable of :class:`Document`."""
        self.matrix_ = build_tfidf(X, sublinear_tf=self.sublinear_tf, min_weight=self.min_weight)
        self.n_features_out_ = self.matrix_.shape[1]
        return self

    @classmethod
    def from_matrix(cls, matrix: WordConceptMatrix, **params):
        est = cls(**params)
        est.matrix_ = matrix
        est.n_features_out_ = matrix.shape[1]
        return est

    def _tokens(self, text):
        return tokenize(text, self._stop()) if isinstance(text, str) else list(text)

    def transform(self, X):
        """Embed each text (raw string or token list); returns CSR ``(n, n_concepts)``."""
        check_is_fitted(self, "matrix_")
        if isinstance(X, (str, Document)):
            raise TypeError("transform expects a sequence of texts")
        out = []
        for text in X:
            tokens = text.tokens if isinstance(text, Document) else self._tokens(text)
            out.append(embed_text(self.matrix_, tokens).vector.to_sparse())
        if not out:
            return sp.csr_matrix((0, self.n_features_out_))
        return sp.vstack(out, format="csr")

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "matrix_")
        return np.asarray(self.matrix_.concepts, dtype=object)

    def word_vector(self, word: str) -> SparseVector:
        check_is_fitted(self, "matrix_")
        return concepts_for_word(self.matrix_, word.lower())

    def similarity(self, a: str, b: str) -> float:
        return cosine(self.transform([a])[0], self.transform([b])[0])

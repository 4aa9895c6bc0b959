"""Benchmarks: word similarity (Spearman), TOEFL synonyms, SYN-REL analogies."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.stats import rankdata

from .esa import SparseVector, WordConceptMatrix, concepts_for_word, cosine
from .exceptions import DegenerateInput, LengthMismatch, MalformedLine, TooFewPairs
from .retrofit import VectorSet

Embedder = Callable[[str], object]

# model scores are rounded before ranking/argmax so ulp-level noise cannot
# split scores that are mathematically tied
SCORE_DECIMALS = 12


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of average-tie ranks."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"lengths differ: {x.size} vs {y.size}")
    if x.size < 2:
        raise LengthMismatch("need at least two observations")
    rx = rankdata(x) - (x.size + 1) / 2.0
    ry = rankdata(y) - (y.size + 1) / 2.0
    sx, sy = np.sqrt(rx @ rx), np.sqrt(ry @ ry)
    if sx == 0 or sy == 0:
        raise DegenerateInput("spearman is undefined for a constant list")
    return float(np.clip((rx @ ry) / (sx * sy), -1.0, 1.0))


@dataclass(frozen=True)
class EvalReport:
    metric: str
    value: float
    items_total: int
    items_scored: int
    oov_skipped: int

    @property
    def value_pct(self) -> float:
        return 100.0 * self.value

    def to_dict(self):
        d = asdict(self)
        d["value_pct"] = round(self.value_pct, 10)
        del d["value"]
        return {k: d[k] for k in ("metric", "value_pct", "items_total", "items_scored", "oov_skipped")}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    def table(self) -> str:
        rows = [
            ("metric", self.metric),
            ("value (%)", f"{self.value_pct:.2f}"),
            ("items total", str(self.items_total)),
            ("items scored", str(self.items_scored)),
            ("oov skipped", str(self.oov_skipped)),
        ]
        w = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{w}}  {v}" for k, v in rows)


# --- embedders ---------------------------------------------------------------


def _nonzero(vec):
    if vec is None:
        return None
    if isinstance(vec, SparseVector):
        return vec if len(vec) else None
    arr = np.asarray(vec, dtype=np.float64).ravel()
    return arr if np.any(arr) else None


def matrix_embedder(matrix: WordConceptMatrix, lowercase=True) -> Embedder:
    """Word -> its concept-space row, or None when absent or all-zero."""

    def embed(word):
        return _nonzero(concepts_for_word(matrix, word.lower() if lowercase else word))

    return embed


def vector_embedder(vs: VectorSet, lowercase=False) -> Embedder:
    def embed(word):
        key = word.lower() if lowercase else word
        return _nonzero(vs[key]) if key in vs else None

    return embed


def as_vector_set(artifact) -> VectorSet:
    if isinstance(artifact, VectorSet):
        return artifact
    if isinstance(artifact, WordConceptMatrix):
        return VectorSet(artifact.words, artifact.weights)
    raise TypeError(f"cannot use {type(artifact).__name__} as a vector set")


# --- word similarity ---------------------------------------------------------


class WordPair(NamedTuple):
    word1: str
    word2: str
    score: float


def eval_wordsim(embedder: Embedder, pairs: Sequence[WordPair], metric="wordsim") -> EvalReport:
    """Spearman of cosine scores against human scores over embeddable pairs."""
    model, human = [], []
    oov = 0
    for w1, w2, score in pairs:
        u, v = _nonzero(embedder(w1)), _nonzero(embedder(w2))
        if u is None or v is None:
            oov += 1
            continue
        model.append(round(cosine(u, v), SCORE_DECIMALS))
        human.append(score)
    total = len(pairs)
    if len(model) < 2:
        raise TooFewPairs(EvalReport(metric, math.nan, total, len(model), oov))
    return EvalReport(metric, spearman(model, human), total, len(model), oov)


# --- TOEFL -------------------------------------------------------------------


class ToeflQuestion(NamedTuple):
    target: str
    candidates: tuple[str, str, str, str]
    answer: int


def answer_toefl(embedder: Embedder, q: ToeflQuestion) -> int | None:
    """Index of the chosen candidate, or None when no choice is defined.

    Candidates without a vector are not eligible; ties go to the lowest index.
    """
    t = _nonzero(embedder(q.target))
    if t is None:
        return None
    best, best_score = None, -math.inf
    for k, cand in enumerate(q.candidates):
        v = _nonzero(embedder(cand))
        if v is None:
            continue
        s = round(cosine(t, v), SCORE_DECIMALS)
        if s > best_score:
            best, best_score = k, s
    return best


def eval_toefl(embedder: Embedder, questions: Sequence[ToeflQuestion]) -> EvalReport:
    correct = scored = 0
    for q in questions:
        choice = answer_toefl(embedder, q)
        if choice is None:
            continue
        scored += 1
        correct += choice == q.answer
    total = len(questions)
    acc = correct / scored if scored else 0.0
    return EvalReport("toefl", acc, total, scored, total - scored)


# --- SYN-REL -----------------------------------------------------------------


class AnalogyQuad(NamedTuple):
    a: str
    b: str
    c: str
    d: str


class _NeighborIndex:
    def __init__(self, vs: VectorSet):
        self.names = vs.names
        self.index = vs.index
        M = vs.current
        self.M = M.tocsr() if sp.issparse(M) else np.asarray(M)
        sq = np.asarray(self.M.multiply(self.M).sum(axis=1)).ravel() if sp.issparse(M) else np.einsum("ij,ij->i", M, M)
        self.norms = np.sqrt(sq)
        # names ranked lexicographically, for tie-breaking
        self.lex_rank = np.empty(len(self.names), dtype=np.int64)
        self.lex_rank[np.argsort(np.array(self.names, dtype=object), kind="stable")] = np.arange(len(self.names))

    def row(self, name):
        r = self.M[self.index[name]]
        return r.toarray().ravel() if sp.issparse(self.M) else r

    def nearest(self, est, exclude):
        en = np.linalg.norm(est)
        dots = np.asarray(self.M @ est).ravel()
        with np.errstate(divide="ignore", invalid="ignore"):
            scores = np.where((self.norms > 0) & (en > 0), dots / (self.norms * en), 0.0)
        scores = np.round(scores, SCORE_DECIMALS)
        for name in exclude:
            scores[self.index[name]] = -np.inf
        top = scores.max()
        if not np.isfinite(top):
            return None
        tied = np.flatnonzero(scores == top)
        return self.names[tied[np.argmin(self.lex_rank[tied])]]


def predict_analogy(vectors, a, b, c) -> str | None:
    """Word closest to ``b - a + c``, excluding ``a``, ``b`` and ``c``."""
    nn = vectors if isinstance(vectors, _NeighborIndex) else _NeighborIndex(as_vector_set(vectors))
    est = nn.row(b) - nn.row(a) + nn.row(c)
    return nn.nearest(est, {a, b, c})


def eval_synrel(vectors, quads: Sequence[AnalogyQuad]) -> EvalReport:
    """Vector-offset analogy accuracy over quads whose a, b, c are known."""
    nn = _NeighborIndex(as_vector_set(vectors))
    correct = scored = 0
    for a, b, c, d in quads:
        if a not in nn.index or b not in nn.index or c not in nn.index:
            continue
        scored += 1
        correct += predict_analogy(nn, a, b, c) == d
    total = len(quads)
    acc = correct / scored if scored else 0.0
    return EvalReport("synrel", acc, total, scored, total - scored)


# --- loaders -----------------------------------------------------------------


def _content_lines(lines: Iterable[str]):
    for line_no, line in enumerate(lines, start=1):
        s = line.strip()
        if s and not s.startswith("#"):
            yield line_no, s


def parse_wordsim(lines: Iterable[str]) -> list[WordPair]:
    """``word1<TAB>word2<TAB>score`` lines; blank and ``#`` lines ignored."""
    pairs, seen = [], set()
    for line_no, s in _content_lines(lines):
        parts = s.split("\t")
        if len(parts) != 3:
            raise MalformedLine(line_no, "expected word1<TAB>word2<TAB>score")
        w1, w2, raw = (p.strip() for p in parts)
        try:
            score = float(raw)
        except ValueError:
            raise MalformedLine(line_no, f"bad score {raw!r}") from None
        if not w1 or not w2 or not math.isfinite(score):
            raise MalformedLine(line_no, "empty word or non-finite score")
        key = frozenset((w1, w2))
        if key in seen:
            raise MalformedLine(line_no, f"duplicate pair {w1!r}/{w2!r}")
        seen.add(key)
        pairs.append(WordPair(w1, w2, score))
    return pairs


def parse_toefl(lines: Iterable[str]) -> list[ToeflQuestion]:
    """Two lines per item: ``target: c1 c2 c3 c4`` then ``answer: k`` (k in 0..3)."""
    items = list(_content_lines(lines))
    if len(items) % 2:
        raise MalformedLine(items[-1][0], "question without an answer line")
    out = []
    for (qn, q), (an, a) in zip(items[::2], items[1::2]):
        target, sep, rest = q.partition(":")
        cands = rest.split()
        if not sep or not target.strip() or len(cands) != 4:
            raise MalformedLine(qn, "expected 'target: c1 c2 c3 c4'")
        if len(set(cands)) != 4:
            raise MalformedLine(qn, "candidates must be distinct")
        key, sep, k = a.partition(":")
        if key.strip() != "answer" or not sep or not k.strip().isdigit() or int(k) > 3:
            raise MalformedLine(an, "expected 'answer: k' with k in 0..3")
        out.append(ToeflQuestion(target.strip(), tuple(cands), int(k)))
    return out


def parse_synrel(lines: Iterable[str]) -> list[AnalogyQuad]:
    out = []
    for line_no, s in _content_lines(lines):
        parts = s.split()
        if len(parts) != 4:
            raise MalformedLine(line_no, "expected four space-separated words")
        out.append(AnalogyQuad(*parts))
    return out


def _read(parser, path):
    with open(path, encoding="utf-8") as f:
        return parser(f)


def read_wordsim(path):
    return _read(parse_wordsim, path)


def read_toefl(path):
    return _read(parse_toefl, path)


def read_synrel(path):
    return _read(parse_synrel, path)

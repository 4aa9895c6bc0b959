"""Document ingestion: tokenization, JSON-lines dumps and task sub-corpora."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from sklearn.feature_extraction.text import ENGLISH_STOP_WORDS

from .exceptions import DuplicateTitle, MalformedRecord, ProviderFailure

DEFAULT_STOPWORDS = frozenset(ENGLISH_STOP_WORDS)

# letters and digits only; `\w` would also admit underscores
_TOKEN_RE = re.compile(r"[^\W_]+")


def tokenize(raw_text: str, stopwords: Iterable[str] = DEFAULT_STOPWORDS) -> list[str]:
    """Split text into lowercase alphanumeric runs, dropping stopwords.

    >>> tokenize("Information Retrieval in Search Engines", {"in"})
    ['information', 'retrieval', 'search', 'engines']
    """
    stop = stopwords if isinstance(stopwords, (set, frozenset)) else set(stopwords)
    return [t for t in _TOKEN_RE.findall(raw_text.lower()) if t not in stop]


def load_stopwords(path) -> frozenset[str]:
    with open(path, encoding="utf-8") as f:
        return frozenset(line.strip().lower() for line in f if line.strip())


@dataclass(frozen=True)
class Document:
    title: str
    tokens: tuple[str, ...]
    out_links: tuple[str, ...] = ()

    def __post_init__(self):
        if not isinstance(self.title, str) or not self.title:
            raise ValueError("document title must be a non-empty string")
        object.__setattr__(self, "tokens", tuple(self.tokens))
        # dedupe in first-seen order, never link to self
        links = dict.fromkeys(t for t in self.out_links if t != self.title)
        object.__setattr__(self, "out_links", tuple(links))


@dataclass(frozen=True)
class Corpus:
    """An ordered, immutable collection of documents.

    ``vocabulary`` maps each distinct token to a dense index in order of first
    occurrence; ``concept_index`` maps each title to its document position.
    """

    documents: tuple[Document, ...]
    vocabulary: Mapping[str, int] = field(init=False, repr=False, compare=False)
    concept_index: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        docs = tuple(self.documents)
        object.__setattr__(self, "documents", docs)
        index = {}
        for doc in docs:
            if doc.title in index:
                raise DuplicateTitle(doc.title)
            index[doc.title] = len(index)
        vocab = {}
        for doc in docs:
            for tok in doc.tokens:
                if tok not in vocab:
                    vocab[tok] = len(vocab)
        object.__setattr__(self, "concept_index", index)
        object.__setattr__(self, "vocabulary", vocab)

    def __len__(self):
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def __contains__(self, title):
        return title in self.concept_index

    def __getitem__(self, title: str) -> Document:
        return self.documents[self.concept_index[title]]

    @property
    def titles(self) -> list[str]:
        return [d.title for d in self.documents]


def _parse_record(line_no: int, line: str, stopwords) -> Document:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(line_no, f"invalid JSON ({exc.msg})") from None
    if not isinstance(rec, dict):
        raise MalformedRecord(line_no, "expected a JSON object")
    title, text, links = rec.get("title"), rec.get("text"), rec.get("links_out")
    if not isinstance(title, str) or not title:
        raise MalformedRecord(line_no, "missing or empty 'title'")
    if not isinstance(text, str):
        raise MalformedRecord(line_no, "missing 'text'")
    if not isinstance(links, list) or not all(isinstance(t, str) for t in links):
        raise MalformedRecord(line_no, "'links_out' must be an array of strings")
    return Document(title, tokenize(text, stopwords), links)


def parse_dump(stream: Iterable[str], stopwords=DEFAULT_STOPWORDS) -> Corpus:
    """Read a JSON-lines article dump into a :class:`Corpus`.

    Every non-blank line must carry ``title``, ``text`` and ``links_out``.
    Line numbers in errors are 1-based physical line numbers.
    """
    stop = frozenset(stopwords)
    docs = []
    seen = set()
    for line_no, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        doc = _parse_record(line_no, line, stop)
        if doc.title in seen:
            raise DuplicateTitle(doc.title)
        seen.add(doc.title)
        docs.append(doc)
    return Corpus(tuple(docs))


def read_dump(path, stopwords=DEFAULT_STOPWORDS) -> Corpus:
    with open(path, encoding="utf-8") as f:
        return parse_dump(f, stopwords)


def dump_lines(corpus: Corpus) -> Iterable[str]:
    """Serialize back to JSON lines; ``text`` is the space-joined token list."""
    for doc in corpus:
        rec = {"title": doc.title, "text": " ".join(doc.tokens), "links_out": list(doc.out_links)}
        yield json.dumps(rec, ensure_ascii=False) + "\n"


def write_dump(corpus: Corpus, sink) -> None:
    for line in dump_lines(corpus):
        sink.write(line)


Provider = Callable[[str, int], Sequence[Document]]


def build_task_corpus(dataset_words: Sequence[str], n_per_word: int, provider: Provider) -> Corpus:
    """Union of the top ``n_per_word`` articles for every dataset word.

    Words are queried in order (repeats included, so a pair list flattened to
    ``2 * n_pairs`` words costs ``2 * n_pairs * n_per_word`` retrievals);
    documents are deduplicated by title in first-seen order.
    """
    if not isinstance(n_per_word, int) or n_per_word < 1:
        raise ValueError("n_per_word must be a positive integer")
    docs: dict[str, Document] = {}
    for word in dataset_words:
        try:
            hits = provider(word, n_per_word)
        except ProviderFailure:
            raise
        except Exception as exc:
            raise ProviderFailure(word, str(exc)) from exc
        for doc in list(hits)[:n_per_word]:
            docs.setdefault(doc.title, doc)
    return Corpus(tuple(docs.values()))


class SearchResultsProvider:
    """File-backed provider: pre-computed search results over a local dump.

    ``results`` maps a query word to its ranked list of article titles;
    ``articles`` holds the documents those titles refer to.
    """

    def __init__(self, results: Mapping[str, Sequence[str]], articles: Corpus):
        self.results = dict(results)
        self.articles = articles

    @classmethod
    def from_files(cls, results_path, dump_path, stopwords=DEFAULT_STOPWORDS):
        with open(results_path, encoding="utf-8") as f:
            results = json.load(f)
        if not isinstance(results, dict):
            raise ValueError(f"{results_path}: expected a JSON object word -> [titles]")
        return cls(results, read_dump(dump_path, stopwords))

    def __call__(self, word: str, n: int) -> list[Document]:
        if word not in self.results:
            raise ProviderFailure(word, "no stored search results")
        out = []
        for title in self.results[word][:n]:
            if title not in self.articles:
                raise ProviderFailure(word, f"article {title!r} missing from dump")
            out.append(self.articles[title])
        return out

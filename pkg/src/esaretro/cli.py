"""Command-line front end.

    esaretro build-index dump.jsonl -o matrix.tsv
    esaretro build-graph dump.jsonl -o graph.adj
    esaretro retrofit matrix.tsv graph.adj -o retro.tsv --iterations 10
    esaretro eval wordsim retro.tsv wordsim.tsv --report report.json

Defaults can come from ``--config FILE`` (``key = value`` lines); explicit
flags win over the file.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
from contextlib import contextmanager

from . import __version__
from .corpus import (
    DEFAULT_STOPWORDS,
    SearchResultsProvider,
    build_task_corpus,
    load_stopwords,
    read_dump,
    tokenize,
    write_dump,
)
from .esa import build_tfidf, cosine, embed_text, is_matrix_file, read_matrix, save_matrix
from .evaluate import (
    as_vector_set,
    eval_synrel,
    eval_toefl,
    eval_wordsim,
    matrix_embedder,
    parse_wordsim,
    read_synrel,
    read_toefl,
    read_wordsim,
    vector_embedder,
)
from .exceptions import EsaError, TooFewPairs
from .graph import build_graph, read_adjacency, save_adjacency
from .retrofit import RetrofitConfig, VectorSet, read_word_vectors, retrofit, save_word_vectors

log = logging.getLogger("esaretro")

CONFIG_KEYS = {
    "iterations": int,
    "tolerance": float,
    "alpha": float,
    "beta": str,
    "stopwords": str,
    "top_n": int,
    "top_k": int,
    "report": str,
    "symmetrize": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
    "sublinear_tf": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
    "min_weight": float,
    "prune_below": float,
}
DEFAULTS = {
    "iterations": 10,
    "tolerance": 1e-2,
    "alpha": 1.0,
    "beta": "invdeg",
    "stopwords": None,
    "top_n": 10,
    "top_k": 10,
    "report": None,
    "symmetrize": False,
    "sublinear_tf": False,
    "min_weight": 0.0,
    "prune_below": 0.0,
}


class CliError(Exception):
    pass


def read_config(path) -> dict:
    conf = {}
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or key not in CONFIG_KEYS:
                raise CliError(f"{path}:{line_no}: unknown or malformed setting {line!r}")
            try:
                conf[key] = CONFIG_KEYS[key](value.strip())
            except ValueError:
                raise CliError(f"{path}:{line_no}: bad value for {key}") from None
    return conf


def resolve(args) -> dict:
    """Merge built-in defaults < config file < explicit flags."""
    opts = dict(DEFAULTS)
    if args.config:
        opts.update(read_config(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            opts[key] = val
    return opts


@contextmanager
def atomic_write(path):
    """Text sink that only replaces ``path`` if the block completes."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            yield f
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _require(path):
    if not os.path.isfile(path):
        raise CliError(f"no such file: {path}")
    return path


def _stopwords(opts):
    if opts["stopwords"] is None:
        return DEFAULT_STOPWORDS
    if opts["stopwords"] == "":
        return frozenset()
    return load_stopwords(_require(opts["stopwords"]))


def _load_artifact(path):
    """A matrix file or a word-vector file, as ``(kind, object)``."""
    _require(path)
    if is_matrix_file(path):
        return "matrix", read_matrix(path)
    return "vectors", read_word_vectors(path)


def _embedder(kind, artifact):
    return matrix_embedder(artifact) if kind == "matrix" else vector_embedder(artifact)


def cmd_build_index(args):
    opts = resolve(args)
    corpus = read_dump(_require(args.corpus), _stopwords(opts))
    matrix = build_tfidf(corpus, sublinear_tf=opts["sublinear_tf"], min_weight=opts["min_weight"])
    with atomic_write(args.output) as f:
        save_matrix(matrix, f)
    v, c = matrix.shape
    print(f"words: {v}\nconcepts: {c}\nentries: {matrix.nnz}")
    return 0


def cmd_build_graph(args):
    opts = resolve(args)
    corpus = read_dump(_require(args.corpus), _stopwords(opts))
    graph = build_graph(corpus)
    if not graph.n_edges:
        log.warning("corpus has no links between its own articles; graph is empty")
    with atomic_write(args.output) as f:
        save_adjacency(graph, f)
    print(f"articles: {len(corpus)}\nnodes: {graph.n_nodes}\nedges: {graph.n_edges}")
    return 0


def _dataset_words(path):
    with open(_require(path), encoding="utf-8") as f:
        lines = f.readlines()
    if any("\t" in ln for ln in lines):
        return [w for p in parse_wordsim(lines) for w in (p.word1, p.word2)]
    return [ln.strip() for ln in lines if ln.strip() and not ln.startswith("#")]


def cmd_build_corpus(args):
    opts = resolve(args)
    words = _dataset_words(args.words)
    provider = SearchResultsProvider.from_files(_require(args.results), _require(args.dump), _stopwords(opts))
    corpus = build_task_corpus(words, opts["top_n"], provider)
    with atomic_write(args.output) as f:
        write_dump(corpus, f)
    print(f"queries: {len(words)}\nretrievals requested: {len(words) * opts['top_n']}\narticles: {len(corpus)}")
    return 0


def cmd_retrofit(args):
    opts = resolve(args)
    kind, art = _load_artifact(args.input)
    graph = read_adjacency(_require(args.graph), symmetrize=opts["symmetrize"])
    cfg = RetrofitConfig(
        alpha=opts["alpha"], beta=opts["beta"], iterations=opts["iterations"],
        tolerance=opts["tolerance"], prune_below=opts["prune_below"],
    )
    vs = VectorSet(art.concepts, art.weights.T.tocsr()) if kind == "matrix" else art
    if not any(n in graph for n in vs.names):
        log.warning("graph shares no names with the input; output equals input")
    out, info = retrofit(vs, graph, cfg)
    for k, value in enumerate(info.history):
        print(f"sweep {k}\tobjective {value:.12g}")
    print(f"sweeps: {info.sweeps}\nfinal change: {info.change:.6g}\nconverged: {str(info.converged).lower()}")
    if kind == "matrix":
        result = art.with_weights(out.current.T.tocsr())
        with atomic_write(args.output) as f:
            save_matrix(result, f)
    else:
        with atomic_write(args.output) as f:
            save_word_vectors(out, f)
    return 0


def cmd_eval(args):
    opts = resolve(args)
    kind, art = _load_artifact(args.artifact)
    _require(args.dataset)
    if args.task == "wordsim":
        try:
            report = eval_wordsim(_embedder(kind, art), read_wordsim(args.dataset))
        except TooFewPairs as exc:
            print(exc.report.table())
            raise
    elif args.task == "toefl":
        report = eval_toefl(_embedder(kind, art), read_toefl(args.dataset))
    else:
        report = eval_synrel(as_vector_set(art), read_synrel(args.dataset))
    print(report.table())
    if opts["report"]:
        with atomic_write(opts["report"]) as f:
            f.write(report.to_json())
    else:
        sys.stdout.write(report.to_json())
    return 0


def cmd_embed(args):
    opts = resolve(args)
    kind, art = _load_artifact(args.matrix)
    if kind != "matrix":
        raise CliError("embed needs an ESA matrix file")
    tokens = tokenize(sys.stdin.read(), _stopwords(opts))
    emb = embed_text(art, tokens)
    print(f"# tokens used: {emb.n_used}, out of vocabulary: {emb.n_oov}")
    top = sorted(emb.vector.items(), key=lambda p: (-p[1], art.concepts[p[0]]))[: opts["top_k"]]
    for j, w in top:
        print(f"{art.concepts[j]}\t{w:.6g}")
    return 0


def cmd_similarity(args):
    kind, art = _load_artifact(args.artifact)
    embed = _embedder(kind, art)
    u, v = embed(args.word1), embed(args.word2)
    missing = [w for w, x in ((args.word1, u), (args.word2, v)) if x is None]
    if missing:
        raise CliError(f"no vector for: {', '.join(missing)}")
    print(f"{cosine(u, v):.6f}")
    return 0


def _add_retrofit_flags(p):
    p.add_argument("--iterations", type=int, help="maximum sweeps (default 10)")
    p.add_argument("--tolerance", type=float, help="stop when mean per-vector change drops below this (default 0.01)")
    p.add_argument("--alpha", type=float, help="weight toward the original vector (default 1)")
    p.add_argument("--beta", help="neighbor weight: invdeg or const:<c> (default invdeg)")
    p.add_argument("--symmetrize", action="store_true", default=None, help="mirror one-sided edges in the graph file")
    p.add_argument("--prune-below", dest="prune_below", type=float, help="drop retrofitted weights below this magnitude")


def build_parser():
    parser = argparse.ArgumentParser(prog="esaretro", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="key=value defaults file")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=fn)
        p.add_argument("--config", default=argparse.SUPPRESS, help="key=value defaults file")
        return p

    stop_help = "stopword file, one per line ('' for none; default: bundled English list)"

    p = add("build-index", cmd_build_index, "build the word/concept TF-IDF matrix")
    p.add_argument("corpus")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--stopwords", help=stop_help)
    p.add_argument("--sublinear-tf", dest="sublinear_tf", action="store_true", default=None)
    p.add_argument("--min-weight", dest="min_weight", type=float)

    p = add("build-graph", cmd_build_graph, "build the article graph from links_out")
    p.add_argument("corpus")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--stopwords", help=stop_help)

    p = add("build-corpus", cmd_build_corpus, "assemble a task corpus from stored search results")
    p.add_argument("words", help="word list (one per line) or word-similarity TSV")
    p.add_argument("results", help="JSON object: word -> ranked article titles")
    p.add_argument("dump", help="JSON-lines dump holding the articles")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--top-n", dest="top_n", type=int)
    p.add_argument("--stopwords", help=stop_help)

    p = add("retrofit", cmd_retrofit, "retrofit a matrix's concept vectors or a word-vector file")
    p.add_argument("input")
    p.add_argument("graph")
    p.add_argument("-o", "--output", required=True)
    _add_retrofit_flags(p)

    p = add("eval", cmd_eval, "score an artifact on a benchmark")
    p.add_argument("task", choices=["wordsim", "toefl", "synrel"])
    p.add_argument("artifact")
    p.add_argument("dataset")
    p.add_argument("--report", help="write the JSON report here (default: stdout)")

    p = add("embed", cmd_embed, "embed text from stdin and list its top concepts")
    p.add_argument("matrix")
    p.add_argument("--top-k", dest="top_k", type=int)
    p.add_argument("--stopwords", help=stop_help)

    p = add("similarity", cmd_similarity, "cosine similarity of two words")
    p.add_argument("artifact")
    p.add_argument("word1")
    p.add_argument("word2")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (CliError, EsaError, OSError, ValueError) as exc:
        print(f"esaretro: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

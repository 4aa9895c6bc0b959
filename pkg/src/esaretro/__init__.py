"""Explicit Semantic Analysis with graph retrofitting of concept vectors."""

__version__ = "0.1.0"

from .corpus import Corpus, Document, build_task_corpus, parse_dump, read_dump, tokenize
from .esa import (
    ESAVectorizer,
    SparseVector,
    WordConceptMatrix,
    build_tfidf,
    concept_vector,
    concepts_for_word,
    cosine,
    embed_text,
)
from .evaluate import EvalReport, eval_synrel, eval_toefl, eval_wordsim, spearman
from .graph import ConceptGraph, build_graph, extract_subgraph, load_adjacency, save_adjacency
from .retrofit import (
    GraphRetrofitter,
    RetrofitConfig,
    VectorSet,
    objective,
    retrofit,
    retrofit_concepts,
)

__all__ = [
    "Corpus", "Document", "build_task_corpus", "parse_dump", "read_dump", "tokenize",
    "ESAVectorizer", "SparseVector", "WordConceptMatrix", "build_tfidf", "concept_vector",
    "concepts_for_word", "cosine", "embed_text",
    "EvalReport", "eval_synrel", "eval_toefl", "eval_wordsim", "spearman",
    "ConceptGraph", "build_graph", "extract_subgraph", "load_adjacency", "save_adjacency",
    "GraphRetrofitter", "RetrofitConfig", "VectorSet", "objective", "retrofit", "retrofit_concepts",
]

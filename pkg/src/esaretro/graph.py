"""Undirected concept inter-relatedness graph and its adjacency-list file."""
from __future__ import annotations

from typing import Iterable, Mapping

from .corpus import Corpus
from .exceptions import AsymmetricEdge, SelfLoop


class ConceptGraph:
    """Immutable undirected simple graph over titles.

    Only nodes with at least one edge are kept.
    """

    __slots__ = ("_adj",)

    def __init__(self, edges: Iterable[tuple[str, str]] = ()):
        adj: dict[str, set[str]] = {}
        for u, v in edges:
            if u == v:
                raise SelfLoop(u)
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
        self._adj = {u: tuple(sorted(adj[u])) for u in sorted(adj)}

    @classmethod
    def from_adjacency(cls, adjacency: Mapping[str, Iterable[str]]) -> "ConceptGraph":
        return cls((u, v) for u, nbrs in adjacency.items() for v in nbrs)

    @property
    def nodes(self) -> frozenset[str]:
        return frozenset(self._adj)

    @property
    def adjacency(self) -> Mapping[str, tuple[str, ...]]:
        return dict(self._adj)

    def neighbors(self, node: str) -> tuple[str, ...]:
        return self._adj.get(node, ())

    def degree(self, node: str) -> int:
        return len(self._adj.get(node, ()))

    def edges(self) -> list[tuple[str, str]]:
        """Each undirected edge once, as ``(u, v)`` with ``u < v``."""
        return [(u, v) for u, nbrs in self._adj.items() for v in nbrs if u < v]

    @property
    def n_nodes(self) -> int:
        return len(self._adj)

    @property
    def n_edges(self) -> int:
        return sum(len(n) for n in self._adj.values()) // 2

    def __contains__(self, node):
        return node in self._adj

    def __len__(self):
        return len(self._adj)

    def __iter__(self):
        return iter(self._adj)

    def __eq__(self, other):
        if not isinstance(other, ConceptGraph):
            return NotImplemented
        return self._adj == other._adj

    def __hash__(self):
        return hash(tuple(self._adj.items()))

    def __repr__(self):
        return f"ConceptGraph(nodes={self.n_nodes}, edges={self.n_edges})"


def build_graph(corpus: Corpus) -> ConceptGraph:
    """Edge {A, B} iff both are corpus titles and either links to the other."""
    titles = corpus.concept_index
    return ConceptGraph(
        (doc.title, t) for doc in corpus for t in doc.out_links if t in titles and t != doc.title
    )


def degree(graph: ConceptGraph, node: str) -> int:
    return graph.degree(node)


def extract_subgraph(graph: ConceptGraph, keep: Iterable[str]) -> ConceptGraph:
    """Induced subgraph on ``keep``; nodes left without edges disappear."""
    keep = set(keep)
    return ConceptGraph((u, v) for u, v in graph.edges() if u in keep and v in keep)


def _encode(title):
    if any(ch.isspace() and ch != " " for ch in title):
        raise ValueError(f"title {title!r} contains whitespace other than spaces")
    return title.replace(" ", "_")


def _decode(token):
    return token.replace("_", " ")


def save_adjacency(graph: ConceptGraph, sink) -> None:
    """One line per node: the node then its neighbors, sorted, underscored."""
    for u in graph:
        sink.write(" ".join([_encode(u), *(_encode(v) for v in graph.neighbors(u))]) + "\n")


def load_adjacency(source: Iterable[str], symmetrize=False) -> ConceptGraph:
    """Parse an adjacency list. Underscores in titles are read back as spaces.

    Every edge must be listed on both endpoint lines unless ``symmetrize`` is
    set (useful for one-directional lexicon files). Lines naming a node with
    no neighbors are accepted and contribute nothing.
    """
    listed: dict[str, set[str]] = {}
    for line in source:
        parts = line.split()
        if not parts:
            continue
        u = _decode(parts[0])
        nbrs = listed.setdefault(u, set())
        for tok in parts[1:]:
            v = _decode(tok)
            if v == u:
                raise SelfLoop(u)
            nbrs.add(v)
    if not symmetrize:
        for u in sorted(listed):
            for v in sorted(listed[u]):
                if u not in listed.get(v, ()):
                    raise AsymmetricEdge(u, v)
    return ConceptGraph((u, v) for u, nbrs in listed.items() for v in nbrs)


def write_adjacency(graph, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        save_adjacency(graph, f)


def read_adjacency(path, symmetrize=False) -> ConceptGraph:
    with open(path, encoding="utf-8") as f:
        return load_adjacency(f, symmetrize=symmetrize)

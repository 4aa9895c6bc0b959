"""Graph retrofitting of dense or sparse vector collections.

Each node vector with graph neighbors is repeatedly replaced by

    q_i <- (sum_j beta_ij q_j + alpha_i qhat_i) / (sum_j beta_ij + alpha_i)

in a fixed order, using already-updated neighbors within a sweep
(Gauss-Seidel). The same engine refines word vectors against a lexicon graph
and concept vectors against the article graph.
"""
from __future__ import annotations

import logging
import numbers
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .esa import WordConceptMatrix
from .exceptions import DimensionMismatch, InvalidConfig
from .graph import ConceptGraph
from .validation import (
    check_names,
    check_nonnegative,
    check_positive_int,
    check_same_shape,
    check_vectors,
)

log = logging.getLogger(__name__)

INVDEG = "invdeg"


def parse_beta(spec) -> tuple[str, float]:
    """``"invdeg"`` -> 1/degree; ``"const:c"`` or a number -> constant ``c``."""
    if isinstance(spec, tuple):
        kind, c = spec
        return (INVDEG, 0.0) if kind == INVDEG else ("const", check_nonnegative(c, "beta"))
    if isinstance(spec, numbers.Real) and not isinstance(spec, bool):
        return "const", check_nonnegative(spec, "beta")
    if isinstance(spec, str):
        s = spec.strip().lower()
        if s in (INVDEG, "inverse-degree"):
            return INVDEG, 0.0
        if s.startswith("const:"):
            try:
                c = float(s[len("const:"):])
            except ValueError:
                raise InvalidConfig(f"bad beta constant in {spec!r}") from None
            return "const", check_nonnegative(c, "beta")
    raise InvalidConfig(f"beta must be 'invdeg' or 'const:<c>', got {spec!r}")


@dataclass
class RetrofitConfig:
    """Solver settings.

    ``alpha`` is a constant or a per-name mapping (missing names get 1.0).
    ``tolerance`` stops early once the mean Euclidean change per updated
    vector in a sweep falls below it. ``update_order`` defaults to sorted
    names. ``prune_below`` zeroes retrofitted weights of smaller magnitude.
    """

    alpha: float | Mapping[str, float] = 1.0
    beta: str | float | tuple = INVDEG
    iterations: int = 10
    tolerance: float = 1e-2
    update_order: Sequence[str] | None = None
    prune_below: float = 0.0

    def __post_init__(self):
        self.beta_rule = parse_beta(self.beta)
        check_positive_int(self.iterations, "iterations", allow_zero=True)
        check_nonnegative(self.tolerance, "tolerance")
        check_nonnegative(self.prune_below, "prune_below")
        if isinstance(self.alpha, Mapping):
            for k, a in self.alpha.items():
                check_nonnegative(a, f"alpha[{k!r}]")
        else:
            check_nonnegative(self.alpha, "alpha")

    def alpha_for(self, name: str) -> float:
        if isinstance(self.alpha, Mapping):
            return float(self.alpha.get(name, 1.0))
        return float(self.alpha)


class VectorSet:
    """Named vectors ``current`` together with their fixed ``original`` values.

    Both blocks are 2-D with one row per name, either dense arrays or CSR
    matrices (sparse rows share one index space).
    """

    def __init__(self, names: Sequence[str], current, original=None):
        cur = check_vectors(current, "current")
        orig = cur.copy() if original is None else check_vectors(original, "original")
        check_same_shape(cur, orig, "current/original")
        if sp.issparse(cur) != sp.issparse(orig):
            raise DimensionMismatch("current and original must both be dense or both sparse")
        self.names = check_names(names, cur.shape[0])
        self.current = cur
        self.original = orig
        self.index = {n: i for i, n in enumerate(self.names)}

    @classmethod
    def from_dict(cls, vectors: Mapping[str, Sequence[float]]) -> "VectorSet":
        names = list(vectors)
        if not names:
            return cls([], np.zeros((0, 0)))
        rows = [np.asarray(vectors[n], dtype=np.float64) for n in names]
        dims = {r.shape for r in rows}
        if len(dims) != 1:
            raise DimensionMismatch(f"vectors have differing shapes: {sorted(dims)}")
        return cls(names, np.vstack(rows))

    @property
    def sparse(self) -> bool:
        return sp.issparse(self.current)

    @property
    def dimension(self) -> int:
        return self.current.shape[1]

    def __len__(self):
        return len(self.names)

    def __contains__(self, name):
        return name in self.index

    def __getitem__(self, name):
        """Current vector of ``name`` as a dense 1-D array."""
        row = self.current[self.index[name]]
        return row.toarray().ravel() if self.sparse else row.copy()

    def original_of(self, name):
        row = self.original[self.index[name]]
        return row.toarray().ravel() if self.sparse else row.copy()

    def reset(self) -> "VectorSet":
        return VectorSet(self.names, self.original, self.original)


@dataclass
class ConvergenceInfo:
    sweeps: int
    objective: float
    change: float
    converged: bool
    history: list[float] = field(default_factory=list)  # objective before sweep 1, then after each


@dataclass
class _Plan:
    order: np.ndarray            # row indices to update, in order
    neighbors: list[np.ndarray]  # per updated row: neighbor row indices
    betas: list[np.ndarray]      # per updated row: beta_ij
    alphas: np.ndarray           # alpha per row (all rows)
    scale: np.ndarray            # per-row factor making scale_i * beta_ij symmetric
    edges: np.ndarray            # (E, 2) unordered edges among rows, u < v
    edge_weight: np.ndarray      # symmetric weight per edge


def _plan(names: Sequence[str], graph: ConceptGraph, cfg: RetrofitConfig) -> _Plan:
    index = {n: i for i, n in enumerate(names)}
    kind, const = cfg.beta_rule
    alphas = np.array([cfg.alpha_for(n) for n in names], dtype=np.float64)
    scale = np.ones(len(names))
    nbrs_of: dict[int, np.ndarray] = {}
    for n in names:
        if n not in graph:
            continue
        # neighbors without vectors are skipped entirely
        nb = np.array(sorted(index[m] for m in graph.neighbors(n) if m in index), dtype=np.int64)
        if nb.size:
            nbrs_of[index[n]] = nb
    if cfg.update_order is None:
        order_names = sorted(names)
    else:
        order_names = [n for n in dict.fromkeys(cfg.update_order) if n in index]
        if set(nbrs_of) - {index[n] for n in order_names}:
            raise InvalidConfig("update_order must list every connected vector")
    order = np.array([index[n] for n in order_names if n in index and index[n] in nbrs_of], dtype=np.int64)
    neighbors, betas = [], []
    for i in order:
        nb = nbrs_of[i]
        if kind == INVDEG:
            b = np.full(nb.size, 1.0 / nb.size)
            scale[i] = nb.size
        else:
            b = np.full(nb.size, const)
        if alphas[i] + b.sum() <= 0:
            raise InvalidConfig(f"zero update denominator for {names[i]!r}")
        neighbors.append(nb)
        betas.append(b)
    edges = np.array(
        [(i, j) for i, nb in sorted(nbrs_of.items()) for j in nb if i < j], dtype=np.int64
    ).reshape(-1, 2)
    edge_weight = np.ones(len(edges)) if kind == INVDEG else np.full(len(edges), const)
    return _Plan(order, neighbors, betas, alphas, scale, edges, edge_weight)


def _sq_row_norms(M) -> np.ndarray:
    if sp.issparse(M):
        return np.asarray(M.multiply(M).sum(axis=1)).ravel()
    return np.einsum("ij,ij->i", M, M)


def _edge_sq_dists(Q, edges) -> np.ndarray:
    if not len(edges):
        return np.zeros(0)
    n, e = Q.shape[0], len(edges)
    D = sp.csr_matrix(
        (np.r_[np.ones(e), -np.ones(e)], (np.r_[np.arange(e), np.arange(e)], np.r_[edges[:, 0], edges[:, 1]])),
        shape=(e, n),
    )
    return _sq_row_norms(D @ Q)


def _objective(Q, Qhat, plan: _Plan, convention: str) -> float:
    anchor = _sq_row_norms(Q - Qhat)
    dist = _edge_sq_dists(Q, plan.edges)
    if convention == "edge":
        return float(np.dot(plan.scale * plan.alphas, anchor) + np.dot(plan.edge_weight, dist))
    if convention == "neighbor":
        total = float(np.dot(plan.alphas, anchor))
        # each edge seen once from each endpoint with that endpoint's beta
        lookup = {(int(u), int(v)): d for (u, v), d in zip(plan.edges, dist)}
        for i, nb, b in zip(plan.order, plan.neighbors, plan.betas):
            for j, bij in zip(nb, b):
                total += bij * lookup[(min(i, j), max(i, j))]
        return total
    raise ValueError(f"unknown objective convention {convention!r}")


def objective(vs: VectorSet, g: ConceptGraph, cfg: RetrofitConfig | None = None, convention="edge") -> float:
    """Retrofitting objective of ``vs.current``.

    ``convention="edge"`` (default) is the quadratic whose exact coordinate
    minimizer is the update rule: each undirected edge counted once, with the
    update's row scaling folded in so edge weights are symmetric (for
    1/degree that means anchor weight ``degree_i * alpha_i`` and edge weight
    1). Sweeps never increase it and its stationary point is the solver's
    fixed point.

    ``convention="neighbor"`` is the literal double sum
    ``sum_i alpha_i |q_i - qhat_i|^2 + sum_i sum_{j in N(i)} beta_ij |q_i - q_j|^2``.
    Gauss-Seidel sweeps do not necessarily decrease it.
    """
    cfg = cfg or RetrofitConfig()
    return _objective(vs.current, vs.original, _plan(vs.names, g, cfg), convention)


def _merge(parts: list[tuple[np.ndarray, np.ndarray]], weights) -> tuple[np.ndarray, np.ndarray]:
    idx = np.concatenate([p[0] for p in parts])
    val = np.concatenate([p[1] * w for p, w in zip(parts, weights)])
    if not idx.size:
        return idx, val
    uniq, inv = np.unique(idx, return_inverse=True)
    summed = np.bincount(inv, weights=val, minlength=uniq.size)
    keep = summed != 0
    return uniq[keep], summed[keep]


def _sweeps_dense(Q, Qhat, plan, cfg, history):
    change = 0.0
    sweeps = 0
    for _ in range(cfg.iterations):
        total = 0.0
        for i, nb, b in zip(plan.order, plan.neighbors, plan.betas):
            a = plan.alphas[i]
            new = (b @ Q[nb] + a * Qhat[i]) / (b.sum() + a)
            total += float(np.linalg.norm(new - Q[i]))
            Q[i] = new
        sweeps += 1
        change = total / max(len(plan.order), 1)
        history.append(_objective(Q, Qhat, plan, "edge"))
        if change < cfg.tolerance:
            break
    return Q, sweeps, change


def _sweeps_sparse(Q, Qhat, plan, cfg, history):
    Q = sp.csr_matrix(Q)
    rows = [(Q.indices[Q.indptr[i]:Q.indptr[i + 1]].copy(), Q.data[Q.indptr[i]:Q.indptr[i + 1]].copy())
            for i in range(Q.shape[0])]
    anchors = [(Qhat.indices[Qhat.indptr[i]:Qhat.indptr[i + 1]], Qhat.data[Qhat.indptr[i]:Qhat.indptr[i + 1]])
               for i in range(Qhat.shape[0])]

    def assemble():
        indptr = np.cumsum([0] + [r[0].size for r in rows])
        idx = np.concatenate([r[0] for r in rows]) if rows else np.zeros(0, np.int64)
        val = np.concatenate([r[1] for r in rows]) if rows else np.zeros(0)
        return sp.csr_matrix((val, idx, indptr), shape=Q.shape)

    change = 0.0
    sweeps = 0
    for _ in range(cfg.iterations):
        total = 0.0
        for i, nb, b in zip(plan.order, plan.neighbors, plan.betas):
            a = plan.alphas[i]
            denom = b.sum() + a
            parts = [rows[j] for j in nb] + [anchors[i]]
            new = _merge(parts, list(b / denom) + [a / denom])
            diff = _merge([new, rows[i]], [1.0, -1.0])
            total += float(np.sqrt(np.dot(diff[1], diff[1])))
            rows[i] = new
        sweeps += 1
        change = total / max(len(plan.order), 1)
        history.append(_objective(assemble(), Qhat, plan, "edge"))
        if change < cfg.tolerance:
            break
    return assemble(), sweeps, change


def _prune(Q, threshold):
    if threshold <= 0:
        return Q
    if sp.issparse(Q):
        Q = Q.copy()
        Q.data[np.abs(Q.data) < threshold] = 0.0
        Q.eliminate_zeros()
        return Q
    return np.where(np.abs(Q) < threshold, 0.0, Q)


def retrofit(vs: VectorSet, g: ConceptGraph, cfg: RetrofitConfig | None = None,
             callback: Callable[[int, float], None] | None = None) -> tuple[VectorSet, ConvergenceInfo]:
    """Run Gauss-Seidel sweeps starting from ``vs.current``.

    Vectors whose names are not connected to another named vector are returned
    unchanged. ``callback(sweep, objective)`` fires for the starting point
    (sweep 0) and after each sweep.
    """
    cfg = cfg or RetrofitConfig()
    plan = _plan(vs.names, g, cfg)
    if not len(plan.order):
        log.warning("no vector has a graph neighbor with a vector; nothing to retrofit")
    Qhat = vs.original
    history = [_objective(vs.current, Qhat, plan, "edge")]
    if vs.sparse:
        Q, sweeps, change = _sweeps_sparse(vs.current, Qhat, plan, cfg, history)
    else:
        Q, sweeps, change = _sweeps_dense(vs.current.copy(), Qhat, plan, cfg, history)
    if cfg.prune_below > 0 and sweeps:
        Q = _prune(Q, cfg.prune_below)
        history[-1] = _objective(Q, Qhat, plan, "edge")
    if callback is not None:
        for k, value in enumerate(history):
            callback(k, value)
    info = ConvergenceInfo(
        sweeps=sweeps,
        objective=history[-1],
        change=change,
        converged=sweeps > 0 and change < cfg.tolerance,
        history=history,
    )
    return VectorSet(vs.names, Q, Qhat), info


def retrofit_concepts(matrix: WordConceptMatrix, g: ConceptGraph, cfg: RetrofitConfig | None = None,
                      ) -> tuple[WordConceptMatrix, ConvergenceInfo]:
    """Retrofit concept vectors (matrix columns) and return the new matrix.

    Word vectors of the result are its rows, as before.
    """
    concepts = VectorSet(matrix.concepts, matrix.weights.T.tocsr())
    out, info = retrofit(concepts, g, cfg)
    return matrix.with_weights(out.current.T.tocsr()), info


class GraphRetrofitter(TransformerMixin, BaseEstimator):
    """Estimator wrapper around :func:`retrofit`.

    Rows of ``X`` are vectors named by the ``names`` passed to :meth:`fit`;
    ``graph`` relates those names. ``X`` may be dense or scipy sparse.

    Attributes
    ----------
    names_ : list of str
    embedding_ : ndarray or CSR matrix
        Retrofitted rows of the training input.
    convergence_ : ConvergenceInfo
    n_iter_ : int
        Sweeps actually run.
    """

    def __init__(self, graph=None, alpha=1.0, beta=INVDEG, n_iter=10, tol=1e-2,
                 update_order=None, prune_below=0.0):
        self.graph = graph
        self.alpha = alpha
        self.beta = beta
        self.n_iter = n_iter
        self.tol = tol
        self.update_order = update_order
        self.prune_below = prune_below

    def _config(self):
        return RetrofitConfig(
            alpha=self.alpha, beta=self.beta, iterations=self.n_iter, tolerance=self.tol,
            update_order=self.update_order, prune_below=self.prune_below,
        )

    def _run(self, X):
        if self.graph is None:
            raise InvalidConfig("GraphRetrofitter needs a graph")
        X = check_vectors(X)
        if X.shape[0] != len(self.names_):
            raise DimensionMismatch(f"X has {X.shape[0]} rows, fitted on {len(self.names_)} names")
        return retrofit(VectorSet(self.names_, X), self.graph, self._config())

    def fit(self, X, y=None, names=None):
        if names is None:
            raise InvalidConfig("fit requires the row names of X")
        self.names_ = check_names(names, np.shape(X)[0])
        out, info = self._run(X)
        self.embedding_ = out.current
        self.convergence_ = info
        self.n_iter_ = info.sweeps
        self.n_features_in_ = out.dimension
        return self

    def fit_transform(self, X, y=None, names=None):
        return self.fit(X, y, names=names).embedding_

    def transform(self, X):
        """Retrofit new vectors laid out like the training rows."""
        check_is_fitted(self, "names_")
        out, _ = self._run(X)
        return out.current


def read_word_vectors(path) -> VectorSet:
    """``name v1 ... vd`` per line; a leading ``count dim`` header is skipped."""
    names, rows = [], []
    dim = None
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            parts = line.split()
            if not parts:
                continue
            if line_no == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                continue
            try:
                vec = [float(x) for x in parts[1:]]
            except ValueError:
                raise ValueError(f"{path}:{line_no}: non-numeric component") from None
            if dim is None:
                dim = len(vec)
                if dim == 0:
                    raise ValueError(f"{path}:{line_no}: vector has no components")
            elif len(vec) != dim:
                raise DimensionMismatch(f"{path}:{line_no}: expected {dim} components, got {len(vec)}")
            names.append(parts[0])
            rows.append(vec)
    if not rows:
        return VectorSet([], np.zeros((0, 0)))
    return VectorSet(names, np.array(rows))


def save_word_vectors(vs: VectorSet, sink) -> None:
    Q = vs.current.toarray() if vs.sparse else vs.current
    for name, row in zip(vs.names, Q):
        sink.write(" ".join([name, *(repr(float(x)) for x in row)]) + "\n")


def write_word_vectors(vs: VectorSet, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        save_word_vectors(vs, f)

"""Sparse simple undirected graphs.

A :class:`SparseGraph` wraps a symmetric CSR adjacency matrix with unit
entries, no self-loops and no duplicate edges. Everything downstream (the
spectral operators, the estimators, the scores) reads the graph through this
type.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

logger = logging.getLogger(__name__)

UNMAPPED = -1


class GraphError(ValueError):
    """Raised for malformed edge lists or invalid graph operations."""


@dataclass(frozen=True, eq=False)
class SparseGraph:
    """Immutable simple undirected graph.

    Attributes
    ----------
    adjacency : scipy.sparse.csr_matrix
        Symmetric 0/1 adjacency, sorted indices, float64 data.
    degrees : ndarray of int64
    """

    adjacency: sp.csr_matrix
    degrees: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def m(self) -> int:
        return int(self.adjacency.nnz // 2)

    @property
    def indptr(self) -> np.ndarray:
        return self.adjacency.indptr

    @property
    def indices(self) -> np.ndarray:
        return self.adjacency.indices

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    def degree_matrix(self) -> sp.dia_matrix:
        return sp.diags(self.degrees.astype(float))

    def to_edge_list(self) -> np.ndarray:
        """Canonical ``(m, 2)`` array of edges with ``i < j``, sorted."""
        upper = sp.triu(self.adjacency, k=1).tocoo()
        edges = np.column_stack([upper.row, upper.col]).astype(np.int64)
        order = np.lexsort((edges[:, 1], edges[:, 0]))
        return edges[order]

    def subgraph(self, nodes: np.ndarray) -> "SparseGraph":
        """Induced subgraph on ``nodes`` (kept in the given order)."""
        nodes = np.asarray(nodes, dtype=np.int64)
        sub = self.adjacency[nodes][:, nodes].tocsr()
        return _from_csr(sub)

    def __repr__(self) -> str:
        return f"SparseGraph(n={self.n}, m={self.m})"


def _from_csr(adj: sp.csr_matrix) -> SparseGraph:
    adj = sp.csr_matrix(adj, dtype=np.float64)
    adj.sort_indices()
    degrees = np.diff(adj.indptr).astype(np.int64)
    return SparseGraph(adjacency=adj, degrees=degrees)


def from_edge_list(edges, n: int | None = None, strict: bool = False) -> SparseGraph:
    """Build a graph from integer node pairs.

    Parameters
    ----------
    edges : array-like of shape (m, 2)
        Node pairs, 0-based.
    n : int, optional
        Node count. Defaults to ``max index + 1``; nodes without edges are
        allowed when ``n`` is given.
    strict : bool
        If True, self-loops and duplicate edges raise :class:`GraphError`.
        Otherwise they are dropped with a warning.
    """
    arr = np.asarray(edges)
    if arr.size == 0:
        arr = arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise GraphError(f"edges must have shape (m, 2), got {arr.shape}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise GraphError("node indices must be integers")
    arr = arr.astype(np.int64)
    if arr.size and arr.min() < 0:
        raise GraphError("node indices must be non-negative")
    top = int(arr.max()) + 1 if arr.size else 0
    if n is None:
        n = top
    elif top > n:
        raise GraphError(f"node index {top - 1} out of range for n={n}")

    loops = arr[:, 0] == arr[:, 1]
    if loops.any():
        if strict:
            i = int(arr[loops][0, 0])
            raise GraphError(f"self-loop at node {i}")
        logger.warning("dropping %d self-loop(s)", int(loops.sum()))
        arr = arr[~loops]

    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    key = lo * max(n, 1) + hi
    uniq, first = np.unique(key, return_index=True)
    if len(uniq) < len(key):
        if strict:
            dup = np.setdiff1d(np.arange(len(key)), first)[0]
            raise GraphError(f"duplicate edge ({lo[dup]}, {hi[dup]})")
        logger.warning("dropping %d duplicate edge(s)", len(key) - len(uniq))
    lo, hi = lo[first], hi[first]

    rows = np.concatenate([lo, hi])
    cols = np.concatenate([hi, lo])
    adj = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    return _from_csr(adj)


def read_edge_list(path, strict: bool = False) -> tuple[SparseGraph, np.ndarray]:
    """Read a whitespace-separated edge list file.

    Lines starting with ``#`` or ``%`` are comments. Node labels are arbitrary
    non-negative integers; they are relabelled densely in increasing order.

    Returns
    -------
    graph : SparseGraph
    labels : ndarray
        ``labels[i]`` is the original id of dense node ``i``.
    """
    path = Path(path)
    pairs = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s[0] in "#%":
                continue
            tok = s.split()
            if len(tok) < 2:
                raise GraphError(f"{path}:{lineno}: expected two node ids")
            try:
                u, v = int(tok[0]), int(tok[1])
            except ValueError:
                raise GraphError(f"{path}:{lineno}: non-integer node id") from None
            if u < 0 or v < 0:
                raise GraphError(f"{path}:{lineno}: negative node id")
            pairs.append((u, v))
    arr = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    labels, dense = np.unique(arr, return_inverse=True)
    graph = from_edge_list(dense.reshape(-1, 2), n=len(labels), strict=strict)
    return graph, labels


def write_edge_list(graph: SparseGraph, path, labels: np.ndarray | None = None) -> None:
    edges = graph.to_edge_list()
    if labels is not None:
        edges = np.asarray(labels)[edges]
    with Path(path).open("w", encoding="utf-8") as fh:
        for u, v in edges:
            fh.write(f"{u} {v}\n")


@dataclass(frozen=True)
class ComponentLabeling:
    component_id: np.ndarray
    sizes: np.ndarray
    giant_index: int

    @property
    def count(self) -> int:
        return len(self.sizes)


def connected_components(g: SparseGraph) -> ComponentLabeling:
    """Label connected components.

    Component ids follow the order of their lowest node, so the largest
    component with the lowest id wins ties.
    """
    if g.n == 0:
        return ComponentLabeling(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), -1)
    _, cid = csgraph.connected_components(g.adjacency, directed=False)
    # renumber by first occurrence; scipy already does this, but do not rely on it
    _, first = np.unique(cid, return_index=True)
    order = np.argsort(first)
    remap = np.empty_like(order)
    remap[order] = np.arange(len(order))
    cid = remap[cid].astype(np.int64)
    sizes = np.bincount(cid)
    return ComponentLabeling(cid, sizes, int(np.argmax(sizes)))


def largest_component(g: SparseGraph) -> tuple[SparseGraph, np.ndarray]:
    """Induced subgraph on the giant component.

    Returns the subgraph and a map of length ``g.n`` from old to new node
    index; nodes outside the component map to ``UNMAPPED``.
    """
    if g.n == 0:
        raise GraphError("empty graph has no components")
    lab = connected_components(g)
    keep = np.flatnonzero(lab.component_id == lab.giant_index)
    mapping = np.full(g.n, UNMAPPED, dtype=np.int64)
    mapping[keep] = np.arange(len(keep))
    if len(keep) == g.n:
        return g, mapping
    return g.subgraph(keep), mapping


def is_connected(g: SparseGraph) -> bool:
    return g.n > 0 and connected_components(g).count == 1


@dataclass(frozen=True)
class GraphStats:
    c_hat: float
    phi_hat: float
    cphi_hat: float

    @property
    def giant_component_expected(self) -> bool:
        # percolation criterion c*Phi > 1
        return self.cphi_hat > 1.0


def graph_stats(g: SparseGraph) -> GraphStats:
    """Degree moments.

    ``c_hat`` is the mean degree, ``phi_hat = sum d^2 / (n c_hat^2)`` estimates
    the second moment of the degree propensities and
    ``cphi_hat = sum d^2 / sum d - 1`` estimates ``c * Phi``.
    """
    if g.m == 0:
        raise GraphError("graph has no edges")
    d = g.degrees.astype(float)
    s1 = d.sum()
    s2 = np.dot(d, d)
    c = s1 / g.n
    return GraphStats(c_hat=float(c), phi_hat=float(s2 / (g.n * c * c)), cphi_hat=float(s2 / s1 - 1.0))


def two_core(g: SparseGraph) -> np.ndarray:
    """Nodes of the 2-core (iteratively strip degree <= 1 nodes)."""
    deg = g.degrees.copy()
    alive = np.ones(g.n, dtype=bool)
    stack = list(np.flatnonzero(deg <= 1))
    indptr, indices = g.indptr, g.indices
    while stack:
        i = stack.pop()
        if not alive[i]:
            continue
        alive[i] = False
        for j in indices[indptr[i] : indptr[i + 1]]:
            if alive[j]:
                deg[j] -= 1
                if deg[j] == 1:
                    stack.append(j)
    return np.flatnonzero(alive)

"""Spectral embedding from the zeta-parametrised Bethe-Hessians and k-means.

``detect_communities`` runs the whole pipeline: restrict to the giant
component, estimate the number of classes, compute the parameters and null
vectors, project the rows on the unit sphere and cluster them.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .estimation import EstimationError, KEstimate, ZetaResult, compute_zeta, estimate_k
from .graph import UNMAPPED, SparseGraph, largest_component
from .spectral import spectral_radius_B


@dataclass(frozen=True)
class Embedding:
    X: np.ndarray
    normalized: bool = False
    zero_rows: np.ndarray | None = None


def _fix_signs(X: np.ndarray) -> np.ndarray:
    X = X.copy()
    idx = np.argmax(np.abs(X), axis=0)
    signs = np.sign(X[idx, np.arange(X.shape[1])])
    signs[signs == 0] = 1.0
    return X * signs


def build_embedding(zeta: ZetaResult, tol: float | None = None, graph: SparseGraph | None = None) -> Embedding:
    """Stack the null vectors column-wise with a deterministic sign.

    If ``graph`` is given, every column is checked to be a null vector of
    its Bethe-Hessian up to ``tol`` (default: the zero tolerance used when
    computing it).
    """
    X = zeta.vectors / np.linalg.norm(zeta.vectors, axis=0)
    if graph is not None:
        from .estimation import zero_tolerance
        from .spectral import bethe_hessian

        for p in range(zeta.k):
            if zeta.saturated[p]:
                continue
            t = tol if tol is not None else 10 * zero_tolerance(zeta.zeta[p])
            res = np.linalg.norm(bethe_hessian(graph, zeta.zeta[p]).matvec(X[:, p]))
            if res > t:
                raise ValueError(f"column {p + 1} is not a null vector: ||H x|| = {res:.3g}")
    return Embedding(_fix_signs(X))


def normalize_rows(X) -> Embedding:
    """Project rows on the unit sphere; all-zero rows stay zero and are flagged."""
    if isinstance(X, Embedding):
        X = X.X
    X = np.asarray(X, dtype=float)
    norms = np.linalg.norm(X, axis=1)
    zero = norms == 0
    out = X / np.where(zero, 1.0, norms)[:, None]
    return Embedding(out, normalized=True, zero_rows=zero)


class KMeansResult(NamedTuple):
    labels: np.ndarray
    inertia: float


def _plusplus(X, k, rng):
    n = len(X)
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        tot = d2.sum()
        if tot <= 0:
            i = rng.integers(n)
        else:
            i = min(np.searchsorted(np.cumsum(d2), rng.random() * tot, side="right"), n - 1)
        centers[j] = X[i]
        d2 = np.minimum(d2, np.sum((X - centers[j]) ** 2, axis=1))
    return centers


def _assign(X, centers):
    d2 = (
        np.sum(X * X, axis=1)[:, None]
        - 2.0 * X @ centers.T
        + np.sum(centers * centers, axis=1)[None, :]
    )
    np.maximum(d2, 0.0, out=d2)
    labels = np.argmin(d2, axis=1)
    return labels, d2[np.arange(len(X)), labels]


def lloyd(X: np.ndarray, centers: np.ndarray, iters: int = 30):
    """Lloyd iterations from given centers.

    Returns ``(labels, centers, history)`` where ``history`` holds the
    objective after every assignment step. Empty clusters are re-seeded at
    the point farthest from its center.
    """
    X = np.asarray(X, dtype=float)
    centers = np.array(centers, dtype=float)
    k = len(centers)
    history = []
    labels, dist = _assign(X, centers)
    history.append(float(dist.sum()))
    for _ in range(iters):
        counts = np.bincount(labels, minlength=k)
        for j in np.flatnonzero(counts == 0):
            far = int(np.argmax(dist))
            labels[far] = j
            dist[far] = 0.0
            counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(centers)
        np.add.at(sums, labels, X)
        new = sums / counts[:, None]
        new_labels, dist = _assign(X, new)
        centers = new
        history.append(float(dist.sum()))
        if np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels
    return labels, centers, history


def kmeans(X, k: int, restarts: int = 10, iters: int = 30, seed: int = 0) -> KMeansResult:
    """k-means++ seeding plus Lloyd, best of ``restarts`` runs.

    Each restart uses a seed spawned from ``seed``; ties in inertia go to the
    earliest restart.
    """
    X = np.asarray(X, dtype=float)
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > len(np.unique(X, axis=0)):
        raise ValueError(f"k={k} exceeds the number of distinct rows")
    best = None
    for child in np.random.SeedSequence(seed).spawn(max(restarts, 1)):
        rng = np.random.default_rng(child)
        labels, _, hist = lloyd(X, _plusplus(X, k, rng), iters)
        if best is None or hist[-1] < best.inertia:
            best = KMeansResult(labels, hist[-1])
    return best


@dataclass
class ClusteringResult:
    """Output of a community-detection run on a whole graph.

    ``labels`` covers every node of the input; nodes outside the giant
    component get label 0 and ``unassigned`` set.
    """

    k_hat: int
    labels: np.ndarray
    inertia: float
    method: str = "bethe_hessian_zeta"
    zeta: ZetaResult | None = None
    k_estimate: KEstimate | None = None
    embedding: Embedding | None = None
    unassigned: np.ndarray | None = None
    component: np.ndarray | None = None
    rho: float = float("nan")
    timings: dict = field(default_factory=dict)
    scores: object = None

    @property
    def giant_labels(self) -> np.ndarray:
        return self.labels[~self.unassigned]

    def to_dict(self) -> dict:
        out = {
            "method": self.method,
            "k_hat": self.k_hat,
            "rho_B": self.rho,
            "inertia": self.inertia,
            "n_nodes": int(len(self.labels)),
            "n_unassigned": int(self.unassigned.sum()) if self.unassigned is not None else 0,
            "timings": self.timings,
        }
        if self.k_estimate is not None:
            out["k_estimate"] = self.k_estimate.to_dict()
        if self.zeta is not None:
            out["zeta"] = self.zeta.to_dict()
        if self.scores is not None:
            out["scores"] = self.scores.to_dict()
        return out


def _expand_labels(sub_labels, mapping):
    labels = np.zeros(len(mapping), dtype=np.int64)
    inside = mapping != UNMAPPED
    labels[inside] = sub_labels[mapping[inside]]
    return labels, ~inside


def detect_communities(
    g: SparseGraph,
    k: int | None = None,
    row_normalize: bool = True,
    seed: int = 0,
    tol: float = 1e-10,
    restarts: int = 10,
    iters: int = 30,
    max_iter: int = 100,
) -> ClusteringResult:
    """Cluster ``g`` with the zeta-parametrised Bethe-Hessian embedding.

    Parameters
    ----------
    g : SparseGraph
        Any simple graph; only its largest connected component is clustered.
    k : int, optional
        Number of classes. Estimated from the regularised Laplacian if omitted.
    row_normalize : bool
        Project the embedding rows on the unit sphere before k-means.
    seed : int
        Seeds both the eigensolver start vectors and k-means.
    tol : float
        Convergence tolerance on the parameters.
    """
    times = {}
    t0 = time.perf_counter()
    sub, mapping = largest_component(g)
    times["giant_component"] = time.perf_counter() - t0

    t = time.perf_counter()
    rho = spectral_radius_B(sub, tol=min(tol, 1e-10), seed=seed)
    times["spectral_radius"] = time.perf_counter() - t

    t = time.perf_counter()
    kest = None
    if k is None:
        kest = estimate_k(sub, tol=min(tol, 1e-10), seed=seed, rho=rho)
        k = kest.k_hat
    elif k < 1:
        raise ValueError("k must be >= 1")
    times["estimate_k"] = time.perf_counter() - t

    t = time.perf_counter()
    if k >= sub.n:
        raise ValueError(f"k={k} is not smaller than the giant component size {sub.n}")
    if k > 1 and rho <= 1.0:
        raise EstimationError("the giant component is a tree or a cycle; there is no community structure")
    zeta = compute_zeta(sub, k, tol=tol, max_iter=max_iter, rho=rho, seed=seed)
    times["compute_zeta"] = time.perf_counter() - t

    t = time.perf_counter()
    emb = build_embedding(zeta)
    if row_normalize:
        emb = normalize_rows(emb)
    if k == 1:
        sub_labels, inertia = np.zeros(sub.n, dtype=np.int64), 0.0
    else:
        sub_labels, inertia = kmeans(emb.X, k, restarts=restarts, iters=iters, seed=seed)
    times["kmeans"] = time.perf_counter() - t
    times["total"] = time.perf_counter() - t0

    labels, unassigned = _expand_labels(sub_labels, mapping)
    return ClusteringResult(
        k_hat=k,
        labels=labels,
        inertia=float(inertia),
        method="bethe_hessian_zeta" if row_normalize else "bethe_hessian_zeta_no_norm",
        zeta=zeta,
        k_estimate=kest,
        embedding=emb,
        unassigned=unassigned,
        component=mapping,
        rho=rho,
        timings=times,
    )

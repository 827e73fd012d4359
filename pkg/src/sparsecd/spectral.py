"""Graph matrices and extreme eigenpairs.

Symmetric operators (Bethe-Hessian, regularised Laplacian, adjacency,
deformed Laplacian ``D - rA``) are handled by implicitly restarted Lanczos
(ARPACK) for large graphs and by a dense solver below ``DENSE_MAX_N``. The
non-backtracking spectrum is read off the ``2n x 2n`` companion matrix

    B' = [[A, I - D],
          [I, 0    ]]

whose eigenvalues other than +-1 coincide with those of the ``2|E| x 2|E|``
non-backtracking matrix.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigs, eigsh

from .graph import SparseGraph, connected_components, two_core

logger = logging.getLogger(__name__)

DENSE_MAX_N = 200
DENSE_MAX_COMPANION = 600
REAL_TOL = 1e-8


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before meeting its tolerance."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


@dataclass(frozen=True, eq=False)
class SymOperator:
    """Symmetric graph matrix, materialised lazily as CSR.

    kind is one of ``"bethe_hessian"`` (``(r^2-1)I + D - rA``),
    ``"shifted_laplacian"`` (``D - rA``), ``"reg_sym_laplacian"``
    (``D_tau^-1/2 A D_tau^-1/2``) or ``"adjacency"``.
    """

    kind: str
    graph: SparseGraph
    param: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def shape(self):
        return (self.n, self.n)

    def to_sparse(self) -> sp.csr_matrix:
        if "M" not in self._cache:
            self._cache["M"] = _build(self.kind, self.graph, self.param)
        return self._cache["M"]

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.to_sparse() @ x

    def as_linear_operator(self) -> LinearOperator:
        M = self.to_sparse()
        return LinearOperator(self.shape, matvec=M.__matmul__, rmatvec=M.__matmul__, dtype=float)

    def toarray(self) -> np.ndarray:
        return self.to_sparse().toarray()


def _build(kind: str, g: SparseGraph, param: float) -> sp.csr_matrix:
    A = g.adjacency
    d = g.degrees.astype(float)
    if kind == "adjacency":
        return A
    if kind == "bethe_hessian":
        r = param
        return (sp.diags(r * r - 1.0 + d) - r * A).tocsr()
    if kind == "shifted_laplacian":
        return (sp.diags(d) - param * A).tocsr()
    if kind == "reg_sym_laplacian":
        dt = d + param
        if np.any(dt <= 0):
            raise ValueError("D + tau I must be positive definite")
        s = sp.diags(1.0 / np.sqrt(dt))
        return (s @ A @ s).tocsr()
    raise ValueError(f"unknown operator kind {kind!r}")


def bethe_hessian(g: SparseGraph, r: float) -> SymOperator:
    if not np.isfinite(r):
        raise ValueError("r must be finite")
    return SymOperator("bethe_hessian", g, float(r))


def shifted_laplacian(g: SparseGraph, r: float) -> SymOperator:
    return SymOperator("shifted_laplacian", g, float(r))


def reg_sym_laplacian(g: SparseGraph, tau: float) -> SymOperator:
    return SymOperator("reg_sym_laplacian", g, float(tau))


def adjacency(g: SparseGraph) -> SymOperator:
    return SymOperator("adjacency", g)


@dataclass(frozen=True)
class EigenPairs:
    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray

    def __len__(self):
        return len(self.values)


def _start_vector(n, seed, v0):
    if v0 is not None:
        v0 = np.asarray(v0, dtype=float)
        if np.linalg.norm(v0) > 0:
            return v0
    return np.random.default_rng(seed).standard_normal(n)


def _sym_extreme(op, p, which, tol, seed, v0, maxiter):
    n = op.shape[0]
    if p < 1 or p >= n:
        raise ValueError(f"need 1 <= p < n, got p={p}, n={n}")
    M = op.to_sparse() if isinstance(op, SymOperator) else sp.csr_matrix(op)
    if n <= DENSE_MAX_N or p >= n // 3:
        w, V = np.linalg.eigh(M.toarray())
        if which == "SA":
            w, V = w[:p], V[:, :p]
        else:
            w, V = w[::-1][:p], V[:, ::-1][:, :p]
    else:
        start = _start_vector(n, seed, v0)
        w = V = None
        for ncv in (max(2 * p + 1, 20), max(4 * p + 40, 60)):
            ncv = min(ncv, n - 1)
            try:
                w, V = eigsh(M, k=p, which=which, tol=tol / 10, v0=start, ncv=ncv, maxiter=maxiter)
                break
            except ArpackNoConvergence as exc:
                last = exc
        if w is None:
            res = None
            if last.eigenvalues is not None and len(last.eigenvalues):
                Vp = last.eigenvectors
                res = np.linalg.norm(M @ Vp - Vp * last.eigenvalues, axis=0)
            raise ConvergenceError(f"Lanczos did not converge for {p} eigenpairs", res)
        order = np.argsort(w) if which == "SA" else np.argsort(w)[::-1]
        w, V = w[order], V[:, order]
    V = V / np.linalg.norm(V, axis=0)
    res = np.linalg.norm(M @ V - V * w, axis=0)
    bad = res > tol * np.maximum(1.0, np.abs(w))
    if np.any(bad):
        raise ConvergenceError(f"eigenpair residuals {res[bad]} exceed tolerance {tol:g}", res)
    return EigenPairs(w, V, res)


def smallest_eigs(op, p: int, tol: float = 1e-10, seed: int = 0, v0=None, maxiter: int | None = None) -> EigenPairs:
    """The ``p`` algebraically smallest eigenpairs, ascending.

    Residuals satisfy ``||Op v - s v|| <= tol * max(1, |s|)``; otherwise
    :class:`ConvergenceError` is raised. ``v0`` warm-starts Lanczos.
    """
    return _sym_extreme(op, p, "SA", tol, seed, v0, maxiter)


def largest_eigs(op, p: int, tol: float = 1e-10, seed: int = 0, v0=None, maxiter: int | None = None) -> EigenPairs:
    """The ``p`` algebraically largest eigenpairs, descending."""
    return _sym_extreme(op, p, "LA", tol, seed, v0, maxiter)


@dataclass(frozen=True, eq=False)
class CompanionOperator:
    """The ``2n x 2n`` companion matrix of the non-backtracking operator."""

    graph: SparseGraph

    @property
    def shape(self):
        return (2 * self.graph.n, 2 * self.graph.n)

    def matvec(self, z: np.ndarray) -> np.ndarray:
        n = self.graph.n
        x, y = z[:n], z[n:]
        top = self.graph.adjacency @ x + (1.0 - self.graph.degrees) * y
        return np.concatenate([top, x])

    def to_sparse(self) -> sp.csr_matrix:
        n = self.graph.n
        eye = sp.identity(n, format="csr")
        off = sp.diags(1.0 - self.graph.degrees.astype(float))
        return sp.bmat([[self.graph.adjacency, off], [eye, None]], format="csr")

    def as_linear_operator(self) -> LinearOperator:
        return LinearOperator(self.shape, matvec=self.matvec, dtype=float)


def _perron_companion(g: SparseGraph, tol: float, seed: int) -> float:
    """Largest eigenvalue modulus of B' for a graph of minimum degree 2."""
    op = CompanionOperator(g)
    dim = op.shape[0]
    if dim <= DENSE_MAX_COMPANION:
        return float(np.max(np.abs(np.linalg.eigvals(op.to_sparse().toarray()))))
    M = op.to_sparse()
    start = np.random.default_rng(seed).standard_normal(dim)
    # B is non-negative, so its Perron root is also the eigenvalue of largest
    # real part; searching by real part sidesteps -rho on bipartite cores and
    # the many eigenvalues sharing the bulk modulus on near-regular graphs
    for k, which, ncv in ((1, "LR", 20), (1, "LR", 60), (2, "LM", 60)):
        try:
            w = eigs(M, k=k, which=which, tol=tol / 10, v0=start, ncv=min(ncv, dim - 1),
                     return_eigenvectors=False, maxiter=max(1000, dim))
            return float(np.max(np.abs(w)))
        except ArpackNoConvergence:
            continue
    raise ConvergenceError("Arnoldi did not converge for the spectral radius of B'")


def spectral_radius_B(g: SparseGraph, tol: float = 1e-10, seed: int = 0) -> float:
    """Spectral radius of the non-backtracking companion matrix.

    The non-trivial spectrum lives on the 2-core: pendant trees only add
    nilpotent directions. Each core component that is a bare cycle has
    radius exactly 1, every other one is solved by Arnoldi on its own
    companion matrix. Since 1 is always an eigenvalue of B' the result is at
    least 1.
    """
    core = two_core(g)
    if len(core) == 0:
        return 1.0
    sub = g.subgraph(core)
    lab = connected_components(sub)
    rho = 1.0
    for c in range(lab.count):
        nodes = np.flatnonzero(lab.component_id == c)
        comp = sub.subgraph(nodes) if lab.count > 1 else sub
        if comp.m <= comp.n:
            continue  # a cycle: B is a permutation
        rho = max(rho, _perron_companion(comp, tol, seed))
    return rho


@dataclass(frozen=True)
class RealSpectrum:
    """Largest real eigenvalues of B' (descending) with first-block vectors."""

    values: np.ndarray
    vectors: np.ndarray | None
    complete: bool


def real_top_eigs_B(g: SparseGraph, p: int, tol: float = 1e-10, seed: int = 0,
                    return_vectors: bool = False, real_tol: float = REAL_TOL) -> RealSpectrum:
    """The ``p`` largest real eigenvalues of B'.

    Eigenvalues with ``|imag| < real_tol * |value|`` count as real. If fewer
    than ``p`` are found after widening the search, whatever exists is
    returned with ``complete=False``.
    """
    n = g.n
    op = CompanionOperator(g)
    dim = 2 * n
    if dim <= DENSE_MAX_COMPANION:
        if return_vectors:
            w, Z = np.linalg.eig(op.to_sparse().toarray())
        else:
            w, Z = np.linalg.eigvals(op.to_sparse().toarray()), None
        return _pick_real(w, Z, n, p, real_tol)
    M = op.to_sparse()
    start = np.random.default_rng(seed).standard_normal(dim)
    best = None
    # a wide Krylov space matters far more than nev when the outliers sit
    # close to the bulk
    for extra in (4, 2 * p + 8, 4 * p + 20):
        nev = min(p + extra, dim - 2)
        try:
            out = eigs(M, k=nev, which="LR", tol=tol / 10, v0=start, ncv=min(max(4 * nev + 20, 60), dim - 1),
                       return_eigenvectors=return_vectors, maxiter=max(1000, dim))
        except ArpackNoConvergence as exc:
            if exc.eigenvalues is None or len(exc.eigenvalues) == 0:
                continue
            out = (exc.eigenvalues, exc.eigenvectors) if return_vectors else exc.eigenvalues
        w, Z = out if return_vectors else (out, None)
        best = _pick_real(w, Z, n, p, real_tol)
        if best.complete:
            return best
    if best is None:
        raise ConvergenceError("Arnoldi found no eigenvalues of B'")
    logger.warning("only %d of %d real eigenvalues of B' found", len(best.values), p)
    return best


def _pick_real(w, Z, n, p, real_tol):
    real = np.abs(w.imag) < real_tol * np.maximum(np.abs(w), 1e-300)
    idx = np.flatnonzero(real)
    idx = idx[np.argsort(w.real[idx])[::-1]][:p]
    values = w.real[idx]
    vectors = None
    if Z is not None:
        vectors = np.real(Z[:n, idx])
        norms = np.linalg.norm(vectors, axis=0)
        vectors = vectors / np.where(norms > 0, norms, 1.0)
    return RealSpectrum(values, vectors, complete=len(values) == p)


def bethe_hessian_trace(g: SparseGraph, r_grid, p: int, tol: float = 1e-10, seed: int = 0) -> np.ndarray:
    """The ``p`` smallest eigenvalues of ``H_r`` for every ``r`` in ``r_grid``.

    Returns an array of shape ``(len(r_grid), p)``.
    """
    r_grid = np.asarray(r_grid, dtype=float)
    out = np.empty((len(r_grid), p))
    v0 = None
    for i, r in enumerate(r_grid):
        pairs = smallest_eigs(bethe_hessian(g, r), p, tol=tol, seed=seed, v0=v0)
        out[i] = pairs.values
        v0 = pairs.vectors.sum(axis=1)
    return out


def companion_eigenvalues(g: SparseGraph, count: int = 20, tol: float = 1e-8, seed: int = 0) -> np.ndarray:
    """All eigenvalues of B' for small graphs, else the ``count`` of
    largest real part."""
    op = CompanionOperator(g)
    if op.shape[0] <= DENSE_MAX_COMPANION:
        return np.linalg.eigvals(op.to_sparse().toarray())
    count = min(count, op.shape[0] - 2)
    start = np.random.default_rng(seed).standard_normal(op.shape[0])
    return eigs(op.to_sparse(), k=count, which="LR", tol=tol, v0=start,
                ncv=min(max(4 * count + 20, 60), op.shape[0] - 1), return_eigenvectors=False)

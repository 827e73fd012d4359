"""Competing spectral embeddings, all followed by the same k-means stage.

Methods
-------
adjacency
    Top-k eigenvectors of A.
rw_laplacian
    Top-k eigenvectors of the random-walk Laplacian ``D^-1 A``, obtained from
    the symmetric ``D^-1/2 A D^-1/2`` and mapped back by ``D^-1/2``.
reg_sym_laplacian
    Top-k eigenvectors of ``D_tau^-1/2 A D_tau^-1/2`` with ``tau`` the mean
    degree, rows projected on the unit sphere.
bethe_hessian_fixed
    Bottom-k eigenvectors of ``H_r`` at ``r = sqrt(rho(B))``.
non_backtracking
    First n coordinates of the eigenvectors of B' for its k largest real
    eigenvalues.
"""
from __future__ import annotations

import time

import numpy as np

from .clustering import ClusteringResult, _expand_labels, _fix_signs, detect_communities, kmeans, normalize_rows
from .graph import SparseGraph, largest_component
from .spectral import (
    ConvergenceError,
    adjacency,
    bethe_hessian,
    largest_eigs,
    real_top_eigs_B,
    reg_sym_laplacian,
    smallest_eigs,
    spectral_radius_B,
)

BASELINES = ("adjacency", "rw_laplacian", "reg_sym_laplacian", "bethe_hessian_fixed", "non_backtracking")
ALL_METHODS = ("bethe_hessian_zeta",) + BASELINES


def embed(method: str, g: SparseGraph, k: int, seed: int = 0, tol: float = 1e-10,
          rho: float | None = None) -> np.ndarray:
    """The ``n x k`` embedding of a connected graph for one baseline."""
    if method == "adjacency":
        X = largest_eigs(adjacency(g), k, tol=tol, seed=seed).vectors
    elif method == "rw_laplacian":
        X = largest_eigs(reg_sym_laplacian(g, 0.0), k, tol=tol, seed=seed).vectors
        X = X / np.sqrt(g.degrees.astype(float))[:, None]
    elif method == "reg_sym_laplacian":
        X = largest_eigs(reg_sym_laplacian(g, g.degrees.mean()), k, tol=tol, seed=seed).vectors
        X = normalize_rows(X).X
    elif method == "bethe_hessian_fixed":
        if rho is None:
            rho = spectral_radius_B(g, tol=tol, seed=seed)
        X = smallest_eigs(bethe_hessian(g, np.sqrt(rho)), k, tol=tol, seed=seed).vectors
    elif method == "non_backtracking":
        spec = real_top_eigs_B(g, k, tol=tol, seed=seed, return_vectors=True)
        if not spec.complete:
            raise ConvergenceError(f"B' has only {len(spec.values)} real eigenvalues among those found, need {k}")
        X = spec.vectors
    else:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(ALL_METHODS)}")
    return _fix_signs(X)


def cluster_with(method: str, g: SparseGraph, k: int, seed: int = 0, tol: float = 1e-10,
                 restarts: int = 10, iters: int = 30) -> ClusteringResult:
    """Run ``method`` on the giant component of ``g`` with ``k`` classes.

    ``"bethe_hessian_zeta"`` dispatches to :func:`detect_communities` so
    that every method can be driven through one entry point.
    """
    if method == "bethe_hessian_zeta":
        return detect_communities(g, k=k, seed=seed, tol=tol, restarts=restarts, iters=iters)
    if k < 2:
        raise ValueError("baselines need k >= 2")
    t0 = time.perf_counter()
    sub, mapping = largest_component(g)
    if k >= sub.n:
        raise ValueError(f"k={k} is not smaller than the giant component size {sub.n}")
    rho = spectral_radius_B(sub, tol=tol, seed=seed) if method == "bethe_hessian_fixed" else float("nan")
    X = embed(method, sub, k, seed=seed, tol=tol, rho=rho)
    t1 = time.perf_counter()
    sub_labels, inertia = kmeans(X, k, restarts=restarts, iters=iters, seed=seed)
    t2 = time.perf_counter()
    labels, unassigned = _expand_labels(sub_labels, mapping)
    return ClusteringResult(
        k_hat=k,
        labels=labels,
        inertia=float(inertia),
        method=method,
        unassigned=unassigned,
        component=mapping,
        rho=rho,
        timings={"embedding": t1 - t0, "kmeans": t2 - t1, "total": t2 - t0},
    )

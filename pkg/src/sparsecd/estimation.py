"""Number of communities and the Bethe-Hessian parameters zeta_p.

For each informative index ``p`` the parameter ``zeta_p`` is the smallest
``r > 1`` at which the p-th smallest eigenvalue of
``H_r = (r^2 - 1) I + D - r A`` vanishes; the corresponding null vector is
the p-th embedding direction.

``compute_zeta`` approaches each ``zeta_p`` from above. At the current point
``r_t`` the p smallest eigenpairs ``(S, X)`` of ``H_{r_t}`` give, via
Courant-Fischer, an upper bound on the p-th eigenvalue of ``H_{r'}``:

    s_p(H_{r'}) <= f(r') / r_t,
    f(r') = (r' - r_t)(1 + r' r_t) + lambda_max((r_t - r') X'DX + r' S).

``f`` is convex, negative at ``r_t`` and positive at 1, so its smaller root
is the next iterate; the iterates decrease monotonically to ``zeta_p``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .graph import SparseGraph
from .spectral import (
    ConvergenceError,
    bethe_hessian,
    largest_eigs,
    real_top_eigs_B,
    reg_sym_laplacian,
    smallest_eigs,
    spectral_radius_B,
)

logger = logging.getLogger(__name__)

_BRACKET_EPS = 1e-12


class EstimationError(RuntimeError):
    """The requested parameters do not exist on this graph."""


def zero_tolerance(r: float) -> float:
    """Threshold under which an eigenvalue of ``H_r`` counts as zero."""
    return 1e-8 * (1.0 + r * r)


@dataclass(frozen=True)
class KEstimate:
    k_hat: int
    rho: float
    threshold: float
    eigenvalues: np.ndarray
    margins: np.ndarray

    def to_dict(self) -> dict:
        return {
            "k_hat": self.k_hat,
            "rho_B": self.rho,
            "threshold": self.threshold,
            "eigenvalues": self.eigenvalues.tolist(),
            "margins": self.margins.tolist(),
        }


def estimate_k(g: SparseGraph, tol: float = 1e-10, seed: int = 0, rho: float | None = None,
               block: int = 4) -> KEstimate:
    """Count the eigenvalues of ``L^sym_{rho-1}`` above ``1/sqrt(rho)``.

    ``rho`` is the spectral radius of the non-backtracking matrix. Eigenvalues
    are requested in growing blocks until one falls below the threshold.
    ``margins`` holds eigenvalue minus threshold for every computed value.
    """
    if rho is None:
        rho = spectral_radius_B(g, tol=tol, seed=seed)
    if rho <= 1.0 + 1e-12:
        logger.warning("spectral radius of B is %.6g <= 1 (tree-like graph); k_hat = 1", rho)
        return KEstimate(1, rho, 1.0, np.zeros(0), np.zeros(0))
    threshold = 1.0 / np.sqrt(rho)
    op = reg_sym_laplacian(g, rho - 1.0)
    p = min(block, g.n - 1)
    while True:
        vals = largest_eigs(op, p, tol=tol, seed=seed).values
        below = np.flatnonzero(vals <= threshold)
        if len(below) or p >= g.n - 1:
            break
        p = min(2 * p, g.n - 1)
    k_hat = int(below[0]) if len(below) else p
    k_hat = max(k_hat, 1)
    shown = vals[: k_hat + 1]
    return KEstimate(k_hat, rho, threshold, shown, shown - threshold)


def fischer_bound(r_t: float, r_prime: float, S, gram) -> float:
    """Evaluate ``f_{r_t}(r')`` from the p smallest eigenvalues ``S`` of
    ``H_{r_t}`` and ``gram = X' D X``."""
    S = np.asarray(S, dtype=float).reshape(-1)
    M = (r_t - r_prime) * np.asarray(gram, dtype=float) + r_prime * np.diag(S)
    top = np.linalg.eigvalsh(0.5 * (M + M.T))[-1]
    return (r_prime - r_t) * (1.0 + r_prime * r_t) + top


def _next_iterate(r_t, S, gram):
    def f(x):
        return fischer_bound(r_t, x, S, gram)

    lo = 1.0 + _BRACKET_EPS
    f_lo, f_hi = f(lo), f(r_t)
    if f_hi >= 0:
        return r_t
    if f_lo <= 0:
        raise EstimationError(f"no root of the Fischer bound in (1, {r_t:.12g}); is the graph connected?")
    return brentq(f, lo, r_t, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


@dataclass
class ZetaResult:
    """Per-index parameters and null vectors.

    ``zeta[0] == 1`` with a constant vector. ``saturated[p]`` marks indices
    whose eigenvalue never reached zero below ``sqrt(rho)``; they are set to
    ``sqrt(rho)`` with the p-th eigenvector there.
    """

    zeta: np.ndarray
    vectors: np.ndarray
    iterations: np.ndarray
    residuals: np.ndarray
    saturated: np.ndarray
    converged: np.ndarray
    multiplicity_groups: list = field(default_factory=list)
    rho: float = float("nan")
    trace: list = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.zeta)

    def to_dict(self) -> dict:
        return {
            "rho_B": self.rho,
            "zeta": self.zeta.tolist(),
            "per_index": [
                {
                    "p": p + 1,
                    "zeta": float(self.zeta[p]),
                    "iterations": int(self.iterations[p]),
                    "residual": float(self.residuals[p]),
                    "saturated": bool(self.saturated[p]),
                    "converged": bool(self.converged[p]),
                }
                for p in range(self.k)
            ],
            "multiplicity_groups": [[q + 1 for q in grp] for grp in self.multiplicity_groups],
        }


def compute_zeta(g: SparseGraph, k: int, tol: float = 1e-10, max_iter: int = 100,
                 rho: float | None = None, seed: int = 0, eig_tol: float | None = None) -> ZetaResult:
    """Compute ``zeta_1..zeta_k`` and the null vectors of ``H_{zeta_p}``.

    Indices are processed from ``k`` down to 2; the search for ``zeta_p``
    starts at ``zeta_{p+1}`` (``sqrt(rho)`` for ``p = k``). An index is
    converged when successive iterates differ by less than ``tol``. When the
    p-th eigenvalue is zero with multiplicity ``delta`` the same value is
    assigned to ``delta`` consecutive indices.
    """
    n = g.n
    if k < 1:
        raise ValueError("k must be >= 1")
    if k >= n:
        raise ValueError("k must be smaller than the number of nodes")
    if eig_tol is None:
        eig_tol = min(1e-10, tol)
    zeta = np.ones(k)
    vectors = np.zeros((n, k))
    vectors[:, 0] = 1.0 / np.sqrt(n)
    iterations = np.zeros(k, dtype=np.int64)
    residuals = np.zeros(k)
    saturated = np.zeros(k, dtype=bool)
    converged = np.ones(k, dtype=bool)
    groups = [[0]]
    trace = []
    if k == 1:
        return ZetaResult(zeta, vectors, iterations, residuals, saturated, converged, groups,
                          rho if rho is not None else float("nan"), trace)
    if rho is None:
        rho = spectral_radius_B(g, tol=tol, seed=seed)
    if rho <= 1.0:
        raise EstimationError("spectral radius of B is <= 1; no informative parameters exist")

    d = g.degrees.astype(float)
    r = np.sqrt(rho)
    p = k
    v0 = None
    while p > 1:
        pairs = smallest_eigs(bethe_hessian(g, r), p, tol=eig_tol, seed=seed, v0=v0)
        s = pairs.values
        its = 0
        ok = True
        if s[p - 1] > zero_tolerance(r):
            # the p-th eigenvalue stays positive up to sqrt(rho)
            zeta[p - 1] = r
            vectors[:, p - 1] = pairs.vectors[:, p - 1]
            residuals[p - 1] = abs(s[p - 1])
            saturated[p - 1] = True
            groups.append([p - 1])
            logger.warning("zeta_%d saturates at sqrt(rho(B)) = %.6g", p, r)
            v0 = pairs.vectors.sum(axis=1)
            p -= 1
            continue
        while abs(s[p - 1]) > zero_tolerance(r):
            if its >= max_iter:
                ok = False
                logger.warning("zeta_%d: no convergence after %d iterations", p, max_iter)
                break
            X = pairs.vectors
            gram = X.T @ (d[:, None] * X)
            r_new = _next_iterate(r, s, gram)
            trace.append((p, its, r, float(s[p - 1])))
            its += 1
            step = r - r_new
            r = r_new
            pairs = smallest_eigs(bethe_hessian(g, r), p, tol=eig_tol, seed=seed, v0=X.sum(axis=1))
            s = pairs.values
            if step < tol:
                break
        ztol = zero_tolerance(r)
        delta = 1
        while delta < p - 1 and abs(s[p - 1 - delta]) <= ztol:
            delta += 1
        grp = list(range(p - delta, p))
        for q in grp:
            zeta[q] = r
            vectors[:, q] = pairs.vectors[:, q]
            residuals[q] = abs(s[q])
            iterations[q] = its
            converged[q] = ok and abs(s[q]) <= ztol
        groups.append(grp)
        v0 = pairs.vectors.sum(axis=1)
        p -= delta
    groups.sort()
    return ZetaResult(zeta, vectors, iterations, residuals, saturated, converged, groups, rho, trace)


def zeta_from_B(g: SparseGraph, k: int, rho: float | None = None, tol: float = 1e-10,
                seed: int = 0) -> np.ndarray:
    """Fast estimate ``rho(B) / s_p(B)`` from the real outliers of B,
    capped at ``sqrt(rho)``."""
    if rho is None:
        rho = spectral_radius_B(g, tol=tol, seed=seed)
    spec = real_top_eigs_B(g, k, tol=tol, seed=seed)
    if not spec.complete:
        raise EstimationError(f"only {len(spec.values)} real eigenvalues of B found, need {k}")
    vals = spec.values
    with np.errstate(divide="ignore"):
        z = np.where(vals > 0, rho / np.where(vals > 0, vals, 1.0), np.inf)
    return np.minimum(z, np.sqrt(rho))


__all__ = [
    "ConvergenceError",
    "EstimationError",
    "KEstimate",
    "ZetaResult",
    "compute_zeta",
    "estimate_k",
    "fischer_bound",
    "zero_tolerance",
    "zeta_from_B",
]

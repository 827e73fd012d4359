"""Partition quality: overlap with ground truth, modularity and the DC-SBM
negative log-likelihood.

All scores are invariant under relabelling of the classes.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .graph import SparseGraph

logger = logging.getLogger(__name__)

EXACT_LIKELIHOOD_MAX_N = 5000
_PROB_CAP = 1.0 - 1e-12


def _as_labels(labels, n=None) -> np.ndarray:
    lab = np.asarray(labels)
    if lab.ndim != 1:
        raise ValueError("labels must be one-dimensional")
    if lab.size and (not np.issubdtype(lab.dtype, np.integer) or lab.min() < 0):
        raise ValueError("labels must be non-negative integers")
    if n is not None and len(lab) != n:
        raise ValueError(f"expected {n} labels, got {len(lab)}")
    return lab.astype(np.int64)


def confusion_matrix(labels_hat, labels_true, k: int) -> np.ndarray:
    M = np.zeros((k, k), dtype=np.int64)
    np.add.at(M, (labels_hat, labels_true), 1)
    return M


def overlap(labels_hat, labels_true, k: int | None = None) -> float:
    """Permutation-maximised agreement, rescaled so that chance gives 0.

    ``(f - 1/k) / (1 - 1/k)`` where ``f`` is the best fraction of nodes on
    which the two labelings agree after relabelling ``labels_hat``. The best
    relabelling is a linear assignment on the confusion matrix.
    """
    lh = _as_labels(labels_hat)
    lt = _as_labels(labels_true, len(lh))
    if len(lh) == 0:
        raise ValueError("empty labelings")
    top = int(max(lh.max(), lt.max())) + 1
    if k is None:
        k = top
    elif top > k:
        raise ValueError(f"labels exceed k={k}")
    if k < 2:
        raise ValueError("overlap needs k >= 2")
    M = confusion_matrix(lh, lt, k)
    rows, cols = linear_sum_assignment(M, maximize=True)
    f = M[rows, cols].sum() / len(lh)
    return float((f - 1.0 / k) / (1.0 - 1.0 / k))


def modularity(g: SparseGraph, labels) -> float:
    """Newman modularity, aggregated per class in O(m + n)."""
    lab = _as_labels(labels, g.n)
    if g.m == 0:
        raise ValueError("modularity is undefined on an edgeless graph")
    two_m = 2.0 * g.m
    k = int(lab.max()) + 1
    A = g.adjacency.tocoo()
    same = lab[A.row] == lab[A.col]
    inside = np.bincount(lab[A.row[same]], minlength=k).astype(float)
    vol = np.bincount(lab, weights=g.degrees.astype(float), minlength=k)
    return float(inside.sum() / two_m - np.sum((vol / two_m) ** 2))


@dataclass(frozen=True)
class DcSbmFit:
    """Fitted propensities and affinities.

    ``C_hat`` is scaled so that the fitted edge probability of the pair
    ``(i, j)`` is ``theta_hat[i] * theta_hat[j] * C_hat[a, b] / n``.
    """

    theta_hat: np.ndarray
    C_hat: np.ndarray
    k: int


def fit_dcsbm(g: SparseGraph, labels) -> DcSbmFit:
    """Plug-in estimates ``theta_i = d_i / mean(d)`` and
    ``C_ab = n * e_ab / (T_a T_b)`` with ``e_ab`` the (ordered) count of
    edge endpoints between classes and ``T_a`` the sum of theta in class a.
    """
    lab = _as_labels(labels, g.n)
    if g.m == 0:
        raise ValueError("likelihood is undefined on an edgeless graph")
    k = int(lab.max()) + 1
    counts = np.bincount(lab, minlength=k)
    if np.any(counts == 0):
        raise ValueError(f"empty class(es) {np.flatnonzero(counts == 0).tolist()}")
    d = g.degrees.astype(float)
    theta = d / d.mean()
    T = np.bincount(lab, weights=theta, minlength=k)
    if np.any(T <= 0):
        raise ValueError("a class has zero total degree; affinity estimate undefined")
    A = g.adjacency.tocoo()
    E = np.zeros((k, k))
    np.add.at(E, (lab[A.row], lab[A.col]), 1.0)
    C = g.n * E / np.outer(T, T)
    return DcSbmFit(theta, C, k)


@dataclass(frozen=True)
class LikelihoodResult:
    value: float
    exact: bool
    error_estimate: float
    clipped_pairs: int


def _edge_term(g, lab, fit):
    e = g.to_edge_list()
    p = fit.theta_hat[e[:, 0]] * fit.theta_hat[e[:, 1]] * fit.C_hat[lab[e[:, 0]], lab[e[:, 1]]] / g.n
    return e, p


def _all_pairs_exact(lab, fit, n, chunk=512):
    """Sum over unordered pairs of log(1 - p_ij), and the number of clipped pairs."""
    th, C = fit.theta_hat, fit.C_hat / n
    total = 0.0
    clipped = 0
    for s in range(0, n - 1, chunk):
        rows = np.arange(s, min(s + chunk, n - 1))
        cols = np.arange(s + 1, n)
        P = th[rows, None] * th[None, cols] * C[lab[rows][:, None], lab[cols][None, :]]
        mask = cols[None, :] > rows[:, None]
        over = (P >= 1.0) & mask
        clipped += int(over.sum())
        P = np.where(mask, np.minimum(P, _PROB_CAP), 0.0)
        total += np.log1p(-P).sum()
    return total, clipped


def _all_pairs_series(lab, fit, n, order):
    """Series ``-sum_q sum_{i<j} p_ij^q / q`` with each power aggregated by class.

    Returns the truncated sum and an estimate of the truncation error.
    """
    th, C = fit.theta_hat, fit.C_hat / n
    k = fit.k
    total = 0.0
    for q in range(1, order + 2):
        Sq = np.bincount(lab, weights=th**q, minlength=k)
        full = Sq @ (C**q) @ Sq
        diag = np.sum(th ** (2 * q) * np.diag(C)[lab] ** q)
        term = -0.5 * (full - diag) / q
        if q <= order:
            total += term
        else:
            pmax = float(th.max() ** 2 * C.max())
            tail = abs(term) / max(1.0 - pmax, 1e-12)
    return total, tail


def dcsbm_log_likelihood(g: SparseGraph, labels, exact: bool | None = None,
                         order: int = 3, details: bool = False):
    """Normalised negative log-likelihood of the fitted DC-SBM.

    ``-(1 / 2m) [sum_{edges} log p_ij + sum_{non-edges} log(1 - p_ij)]``
    over unordered pairs. Fitted probabilities of at least 1 are clipped
    (with a warning). The non-edge sum is exact for graphs up to
    ``EXACT_LIKELIHOOD_MAX_N`` nodes; above that the logarithm is expanded
    to ``order`` terms, each aggregated per class in O(n).

    With ``details=True`` a :class:`LikelihoodResult` is returned, whose
    ``error_estimate`` bounds the truncation error of the normalised value.
    """
    lab = _as_labels(labels, g.n)
    fit = fit_dcsbm(g, lab)
    n = g.n
    if exact is None:
        exact = n <= EXACT_LIKELIHOOD_MAX_N
    e, p = _edge_term(g, lab, fit)
    edge_over = int(np.sum(p >= 1.0))
    p_edge = np.minimum(p, 1.0)
    edge_sum = np.log(p_edge).sum()
    # the all-pairs sums include the edges; take them back out the same way
    if exact:
        pairs, clipped = _all_pairs_exact(lab, fit, n)
        edge_back = np.log1p(-np.minimum(p, _PROB_CAP)).sum()
        err = 0.0
    else:
        pairs, err = _all_pairs_series(lab, fit, n, order)
        edge_back = -sum(np.sum(p**q) / q for q in range(1, order + 1))
        clipped = edge_over
    if edge_over:
        logger.debug("%d fitted probabilities on edges clipped at 1", edge_over)
    if clipped > edge_over:
        logger.warning("%d fitted probabilities on non-edges clipped below 1", clipped - edge_over)
    value = -(edge_sum + pairs - edge_back) / (2.0 * g.m)
    if details:
        return LikelihoodResult(float(value), bool(exact), float(err / (2.0 * g.m)), int(clipped))
    return float(value)


@dataclass(frozen=True)
class ScoreBundle:
    modularity: float
    neg_log_likelihood: float
    k_used: int
    overlap: float | None = None

    def to_dict(self) -> dict:
        out = {
            "modularity": self.modularity,
            "neg_log_likelihood": self.neg_log_likelihood,
            "k_used": self.k_used,
        }
        if self.overlap is not None:
            out["overlap"] = self.overlap
        return out


def score_partition(g: SparseGraph, labels, truth=None, k: int | None = None) -> ScoreBundle:
    """All scores of ``labels`` on ``g``; overlap only if ``truth`` is given.

    Label values are compacted first, so absent classes do not count.
    """
    lab = _as_labels(labels, g.n)
    _, lab = np.unique(lab, return_inverse=True)
    k_used = int(lab.max()) + 1
    ov = None
    if truth is not None:
        t = _as_labels(truth, g.n)
        kk = k if k is not None else int(max(k_used, t.max() + 1))
        ov = overlap(lab, t, kk)
    return ScoreBundle(
        modularity=modularity(g, lab),
        neg_log_likelihood=dcsbm_log_likelihood(g, lab),
        k_used=k_used,
        overlap=ov,
    )

"""Degree-corrected stochastic block model sampling.

Edges are drawn independently with probability
``min(theta_i * theta_j * C[l_i, l_j] / n, 1)``. The degree propensities
``theta`` are rescaled to unit empirical mean so that the expected mean
degree equals ``c`` whenever ``C @ diag(pi) @ 1 = c * 1``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .graph import SparseGraph, from_edge_list

EXACT_SAMPLING_MAX_N = 2000
_MAX_RESAMPLE = 1000
_OFFDIAG_FLOOR = 1e-3


@dataclass(frozen=True)
class ThetaSpec:
    """Sampler for the raw degree propensities.

    ``kind`` is ``"constant"`` or ``"power-uniform"``; the latter draws
    ``U(low, high) ** exponent``.
    """

    kind: str = "constant"
    low: float = 3.0
    high: float = 10.0
    exponent: float = 1.0

    @classmethod
    def parse(cls, text: str | "ThetaSpec" | None) -> "ThetaSpec":
        """Parse ``"constant"`` or ``"power-uniform(a,b,e)"``."""
        if text is None:
            return cls()
        if isinstance(text, ThetaSpec):
            return text
        s = text.strip().lower().replace(" ", "")
        if s in ("constant", "const", "1"):
            return cls()
        m = re.fullmatch(r"(?:power-uniform|power-of-uniform|pu)\(([^,]+),([^,]+),([^,]+)\)", s)
        if not m:
            raise ValueError(f"unrecognised theta spec {text!r}")
        low, high, e = (float(x) for x in m.groups())
        if not 0 < low < high or e <= 0:
            raise ValueError(f"invalid theta spec {text!r}: need 0 < a < b and e > 0")
        return cls("power-uniform", low, high, e)

    def __str__(self) -> str:
        if self.kind == "constant":
            return "constant"
        return f"power-uniform({self.low:g},{self.high:g},{self.exponent:g})"

    def _raw_moment(self, q: float) -> float:
        a, b, e = self.low, self.high, self.exponent * q
        return (b ** (e + 1) - a ** (e + 1)) / ((e + 1) * (b - a))

    @property
    def phi(self) -> float:
        """Second moment ``E[theta^2]`` of the unit-mean propensities."""
        if self.kind == "constant":
            return 1.0
        return self._raw_moment(2) / self._raw_moment(1) ** 2

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "constant":
            return np.ones(n)
        raw = rng.uniform(self.low, self.high, size=n) ** self.exponent
        return raw / raw.mean()


@dataclass(frozen=True, eq=False)
class DcSbmParams:
    n: int
    C: np.ndarray
    pi: np.ndarray
    theta: ThetaSpec = field(default_factory=ThetaSpec)
    c_out: float | None = None

    def __post_init__(self):
        C = np.asarray(self.C, dtype=float)
        pi = np.asarray(self.pi, dtype=float)
        if C.ndim != 2 or C.shape[0] != C.shape[1] or C.shape[0] != len(pi):
            raise ValueError("C must be k x k with len(pi) == k")
        if not np.allclose(C, C.T, rtol=0, atol=1e-12):
            raise ValueError("C must be symmetric")
        if np.any(C <= 0):
            raise ValueError("C must have strictly positive entries")
        if np.any(pi <= 0) or abs(pi.sum() - 1) > 1e-10:
            raise ValueError("pi must be positive and sum to 1")
        if self.n < len(pi):
            raise ValueError("n must be at least k")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "theta", ThetaSpec.parse(self.theta))

    @property
    def k(self) -> int:
        return len(self.pi)

    @property
    def c(self) -> float:
        return float(np.mean(self.C @ self.pi))

    @property
    def row_sums(self) -> np.ndarray:
        return self.C @ self.pi

    def class_sizes(self) -> np.ndarray:
        sizes = np.rint(self.n * self.pi).astype(np.int64)
        sizes[np.argmax(self.pi)] += self.n - sizes.sum()
        if np.any(sizes <= 0):
            raise ValueError("n too small for the class proportions")
        return sizes

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "C": self.C.tolist(),
            "pi": self.pi.tolist(),
            "theta": str(self.theta),
            "c": self.c,
            "c_out": self.c_out,
        }


def _check_positive(**kw):
    for name, v in kw.items():
        if not np.isfinite(v) or v <= 0:
            raise ValueError(f"{name} must be positive, got {v}")


def two_class_symmetric(n: int, c_in: float, c_out: float, theta="constant") -> DcSbmParams:
    _check_positive(c_in=c_in, c_out=c_out)
    C = np.array([[c_in, c_out], [c_out, c_in]], dtype=float)
    return DcSbmParams(n, C, np.array([0.5, 0.5]), theta, c_out=c_out)


def planted_partition(n: int, k: int, c_in: float, c_out: float, theta="constant") -> DcSbmParams:
    """Equal-size classes, ``c_in`` on the diagonal of C and ``c_out`` elsewhere."""
    if k < 1:
        raise ValueError("k must be >= 1")
    _check_positive(c_in=c_in, c_out=c_out)
    C = np.full((k, k), float(c_out))
    np.fill_diagonal(C, c_in)
    return DcSbmParams(n, C, np.full(k, 1.0 / k), theta, c_out=c_out if k > 1 else None)


def random_affinity(
    k: int,
    c: float,
    c_out: float,
    seed=None,
    n: int = 10000,
    pi=None,
    theta="constant",
) -> DcSbmParams:
    """Random C with Gaussian off-diagonals and rows tuned to sum to ``c``.

    Off-diagonal entries are drawn from ``N(c_out, c_out / k)`` (variance),
    symmetrised and floored at a small positive value; the diagonal is then
    solved so that ``C @ pi = c``. Draws with a non-positive diagonal are
    rejected.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    _check_positive(c=c, c_out=c_out)
    if not c > c_out:
        raise ValueError("need c > c_out")
    pi = np.full(k, 1.0 / k) if pi is None else np.asarray(pi, dtype=float)
    if len(pi) != k or np.any(pi <= 0):
        raise ValueError("pi must be positive with length k")
    pi = pi / pi.sum()
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(k, 1)
    for _ in range(_MAX_RESAMPLE):
        C = np.zeros((k, k))
        C[iu] = np.maximum(rng.normal(c_out, np.sqrt(c_out / k), size=len(iu[0])), _OFFDIAG_FLOOR)
        C = C + C.T
        diag = (c - C @ pi) / pi
        if np.all(diag > 0):
            np.fill_diagonal(C, diag)
            return DcSbmParams(n, C, pi, theta, c_out=c_out)
    raise ValueError(f"could not satisfy the row-sum constraint after {_MAX_RESAMPLE} draws")


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    graph: SparseGraph
    labels: np.ndarray
    theta: np.ndarray
    params: DcSbmParams
    seed: int | None = None


def _assign_labels(params: DcSbmParams, rng) -> np.ndarray:
    sizes = params.class_sizes()
    labels = np.repeat(np.arange(params.k), sizes)
    rng.shuffle(labels)
    return labels


def _sample_exact(theta, labels, C, n, rng):
    edges = []
    for i in range(n - 1):
        j = np.arange(i + 1, n)
        p = np.minimum(theta[i] * theta[j] * C[labels[i], labels[j]] / n, 1.0)
        hit = rng.random(len(j)) < p
        if hit.any():
            edges.append(np.column_stack([np.full(hit.sum(), i), j[hit]]))
    return np.concatenate(edges) if edges else np.zeros((0, 2), dtype=np.int64)


def _sample_blocks(theta, labels, C, n, rng):
    """Poissonised block sampler, thinned to exact Bernoulli marginals.

    For each class pair, proposals ``(i, j)`` are drawn with probability
    proportional to ``theta_i theta_j``; their total count is Poisson with a
    rate dominating ``-log(1 - p_ij)`` on every pair. Each proposal is kept
    with probability ``-log(1 - p_ij) / rate_ij``, so pair ``(i, j)`` receives
    ``Poisson(-log(1 - p_ij))`` hits and is an edge with probability ``p_ij``.
    """
    k = C.shape[0]
    members = [np.flatnonzero(labels == a) for a in range(k)]
    weights = [theta[m] for m in members]
    totals = [w.sum() for w in weights]
    cdfs = [np.cumsum(w) / w.sum() for w in weights]
    pmax = 1.0 - 1e-12
    chunks = []
    for a in range(k):
        for b in range(a, k):
            if len(members[a]) == 0 or len(members[b]) == 0:
                continue
            top = min(weights[a].max() * weights[b].max() * C[a, b] / n, pmax)
            gamma = -np.log1p(-top) / top  # max of -log(1-p)/p over the block
            rate = gamma * C[a, b] / n * totals[a] * totals[b]
            if a == b:
                rate /= 2.0
            count = rng.poisson(rate)
            if count == 0:
                continue
            i = members[a][np.searchsorted(cdfs[a], rng.random(count), side="right").clip(max=len(members[a]) - 1)]
            j = members[b][np.searchsorted(cdfs[b], rng.random(count), side="right").clip(max=len(members[b]) - 1)]
            keep = i != j
            i, j = i[keep], j[keep]
            p = np.minimum(theta[i] * theta[j] * C[a, b] / n, pmax)
            accept = rng.random(len(i)) * gamma * p < -np.log1p(-p)
            chunks.append(np.column_stack([i[accept], j[accept]]))
    if not chunks:
        return np.zeros((0, 2), dtype=np.int64)
    return np.concatenate(chunks)


def sample_dcsbm(params: DcSbmParams, seed=None) -> LabeledGraph:
    """Draw a DC-SBM graph with ground-truth labels.

    Graphs with fewer than ``EXACT_SAMPLING_MAX_N`` nodes are sampled pair by
    pair; larger ones with the block sampler, which has the same edge
    marginals at expected cost O(n + m). The same seed gives the same graph.
    """
    rng = np.random.default_rng(seed)
    n = params.n
    labels = _assign_labels(params, rng)
    theta = params.theta.sample(n, rng)
    if n < EXACT_SAMPLING_MAX_N:
        edges = _sample_exact(theta, labels, params.C, n, rng)
    else:
        edges = _sample_blocks(theta, labels, params.C, n, rng)
    if len(edges):
        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        key = np.unique(lo * n + hi)
        edges = np.column_stack([key // n, key % n])
    graph = from_edge_list(edges, n=n, strict=True)
    return LabeledGraph(graph, labels, theta, params, seed)


@dataclass(frozen=True)
class ModelSpectrum:
    nu: np.ndarray
    alpha: float
    alpha_c: float
    zeta_theoretical: np.ndarray
    phi: float

    @property
    def detectable(self) -> np.ndarray:
        """Mask of classes whose eigenvalue clears ``sqrt(c / Phi)``."""
        return self.nu > np.sqrt(self.nu[0] / self.phi)


def detectability(params: DcSbmParams) -> ModelSpectrum:
    """Eigenvalues of ``C @ diag(pi)`` and the hardness of the problem.

    ``alpha = 2 (c - c_out) / sqrt(c)`` and ``alpha_c = 2 / sqrt(Phi)``. For
    a model built without a nominal ``c_out`` the smallest off-diagonal
    entry of C is used.
    """
    # C @ diag(pi) is similar to the symmetric pi^1/2 C pi^1/2, so the spectrum is real
    s = np.sqrt(params.pi)
    nu = np.sort(np.linalg.eigvalsh(s[:, None] * params.C * s[None, :]))[::-1]
    c = params.c
    if params.c_out is not None:
        c_out = params.c_out
    elif params.k > 1:
        c_out = float(params.C[~np.eye(params.k, dtype=bool)].min())
    else:
        c_out = c
    phi = params.theta.phi
    with np.errstate(divide="ignore"):
        zeta = np.where(nu > 0, c / np.where(nu > 0, nu, 1.0), np.inf)
    return ModelSpectrum(
        nu=nu,
        alpha=float(2.0 * (c - c_out) / np.sqrt(c)),
        alpha_c=float(2.0 / np.sqrt(phi)),
        zeta_theoretical=zeta,
        phi=phi,
    )

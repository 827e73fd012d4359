import numpy as np
import pytest

from sparsecd.baselines import ALL_METHODS, BASELINES, cluster_with, embed
from sparsecd.estimation import compute_zeta
from sparsecd.generators import ThetaSpec, sample_dcsbm, two_class_symmetric
from sparsecd.graph import largest_component
from sparsecd.scoring import modularity, overlap
from sparsecd.spectral import ConvergenceError, reg_sym_laplacian, largest_eigs, spectral_radius_B

from conftest import random_regular

THETA = "power-uniform(3,10,4)"


def near_threshold(ratio, seed, n=20000, c=5.0):
    alpha = ratio * 2 / np.sqrt(ThetaSpec.parse(THETA).phi)
    c_out = c - alpha * np.sqrt(c) / 2
    lg = sample_dcsbm(two_class_symmetric(n, 2 * c - c_out, c_out, THETA), seed=seed)
    g, mapping = largest_component(lg.graph)
    return g, lg.labels[mapping >= 0]


@pytest.mark.parametrize("method", ALL_METHODS)
def test_every_method_on_karate(karate_graph, method):
    res = cluster_with(method, karate_graph, 2)
    assert res.labels.shape == (34,) and set(np.unique(res.labels)) == {0, 1}
    assert res.method == method


def test_reg_sym_laplacian_karate_modularity(karate_graph):
    res = cluster_with("reg_sym_laplacian", karate_graph, 2)
    assert modularity(karate_graph, res.labels) == pytest.approx(0.37, abs=0.01)


def test_rw_embedding_is_random_walk_eigenvector(small_sbm):
    g, _ = small_sbm
    X = embed("rw_laplacian", g, 3)
    P = g.adjacency.toarray() / g.degrees[:, None]
    vals = largest_eigs(reg_sym_laplacian(g, 0.0), 3).values
    assert np.allclose(P @ X, X * vals, atol=1e-8)


def test_reg_sym_rows_normalized(small_sbm):
    g, _ = small_sbm
    assert np.allclose(np.linalg.norm(embed("reg_sym_laplacian", g, 2), axis=1), 1)


def test_shared_kmeans_stage(small_sbm):
    g, _ = small_sbm
    a = cluster_with("adjacency", g, 2, seed=4)
    b = cluster_with("adjacency", g, 2, seed=4)
    assert np.array_equal(a.labels, b.labels)


def test_unknown_method(small_sbm):
    g, _ = small_sbm
    with pytest.raises(ValueError, match="unknown method"):
        cluster_with("louvain", g, 2)
    with pytest.raises(ValueError):
        cluster_with("adjacency", g, 1)


def test_non_backtracking_missing_real_eigenvalues():
    # a random regular graph has a single real outlier (d - 1)
    with pytest.raises(ConvergenceError):
        cluster_with("non_backtracking", random_regular(2000, 4, seed=0), 2)


def test_fixed_bethe_hessian_beats_adjacency_near_threshold():
    diffs = []
    for seed in range(3):
        g, truth = near_threshold(1.2, seed)
        bh = overlap(cluster_with("bethe_hessian_fixed", g, 2, seed=seed).labels, truth)
        adj = overlap(cluster_with("adjacency", g, 2, seed=seed).labels, truth)
        diffs.append(bh - adj)
    assert np.mean(diffs) > 0


@pytest.mark.parametrize("seed", [0, 1])
def test_fixed_and_zeta_embeddings_align_near_threshold(seed):
    g, _ = near_threshold(1.2, seed)
    rho = spectral_radius_B(g)
    z = compute_zeta(g, 2, rho=rho)
    X = embed("bethe_hessian_fixed", g, 2, rho=rho)
    # informative columns only: column 1 of the zeta embedding is constant
    cos = abs(X[:, 1] @ z.vectors[:, 1]) / (np.linalg.norm(X[:, 1]) * np.linalg.norm(z.vectors[:, 1]))
    assert np.degrees(np.arccos(min(cos, 1.0))) < 10


def test_baseline_names():
    assert set(BASELINES) < set(ALL_METHODS) and len(ALL_METHODS) == 6

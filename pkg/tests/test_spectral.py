import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsecd.generators import sample_dcsbm, two_class_symmetric
from sparsecd.graph import from_edge_list, largest_component
from sparsecd.spectral import (
    CompanionOperator,
    ConvergenceError,
    adjacency,
    bethe_hessian,
    bethe_hessian_trace,
    largest_eigs,
    real_top_eigs_B,
    reg_sym_laplacian,
    shifted_laplacian,
    smallest_eigs,
    spectral_radius_B,
)

from conftest import complete_graph, cycle_graph, random_connected_graph, random_regular


def test_bethe_hessian_matvec_formula(small_sbm):
    g, _ = small_sbm
    x = np.random.default_rng(0).standard_normal(g.n)
    r = 1.7
    d = g.degrees
    expect = (r * r - 1) * x + d * x - r * (g.adjacency @ x)
    assert np.allclose(bethe_hessian(g, r).matvec(x), expect, atol=1e-12)


@pytest.mark.parametrize("make", [
    lambda g: bethe_hessian(g, 2.3),
    lambda g: shifted_laplacian(g, 0.7),
    lambda g: reg_sym_laplacian(g, 1.5),
    adjacency,
])
def test_operators_symmetric(small_sbm, make):
    g, _ = small_sbm
    op = make(g)
    rng = np.random.default_rng(1)
    for _ in range(5):
        x, y = rng.standard_normal((2, g.n))
        lhs, rhs = x @ op.matvec(y), op.matvec(x) @ y
        assert abs(lhs - rhs) <= 1e-12 * np.linalg.norm(x) * np.linalg.norm(y) * max(1, abs(lhs))


def test_linear_operator_matches_sparse(small_sbm):
    g, _ = small_sbm
    op = bethe_hessian(g, 1.3)
    x = np.ones(g.n)
    assert np.allclose(op.as_linear_operator() @ x, op.to_sparse() @ x)


def test_h1_laplacian_null_vector(small_sbm):
    g, _ = small_sbm
    assert np.allclose(bethe_hessian(g, 1.0).matvec(np.ones(g.n)), 0)


def test_triangle_bethe_hessian():
    H = bethe_hessian(complete_graph(3), 2.0).toarray()
    assert np.allclose(H, 5 * np.eye(3) - 2 * (np.ones((3, 3)) - np.eye(3)))
    assert np.allclose(np.linalg.eigvalsh(H), [1, 7, 7])


def test_smallest_h1_connected():
    g = random_connected_graph(np.random.default_rng(2), 400, 300)
    pairs = smallest_eigs(bethe_hessian(g, 1.0), 2)
    assert abs(pairs.values[0]) < 1e-9
    v = pairs.vectors[:, 0]
    assert abs(abs(v @ np.ones(g.n)) / np.sqrt(g.n) - 1) < 1e-9


def test_smallest_h1_counts_components():
    rng = np.random.default_rng(3)
    parts = [random_connected_graph(rng, 80, 40) for _ in range(3)]
    edges = np.concatenate([p.to_edge_list() + 80 * i for i, p in enumerate(parts)])
    g = from_edge_list(edges, n=240)
    vals = smallest_eigs(bethe_hessian(g, 1.0), 4).values
    assert np.all(np.abs(vals[:3]) < 1e-9) and vals[3] > 1e-6


@pytest.mark.parametrize("n", [150, 500])
def test_extreme_eigs_match_dense(n):
    lg = sample_dcsbm(two_class_symmetric(n, 9, 3, "power-uniform(3,10,2)"), seed=n)
    g, _ = largest_component(lg.graph)
    for op in (bethe_hessian(g, 2.1), reg_sym_laplacian(g, 3.0), adjacency(g)):
        dense = np.linalg.eigvalsh(op.toarray())
        lo = smallest_eigs(op, 4, seed=1)
        hi = largest_eigs(op, 4, seed=1)
        assert np.allclose(lo.values, dense[:4], atol=1e-8)
        assert np.allclose(hi.values, dense[::-1][:4], atol=1e-8)
        assert np.all(lo.residuals <= 1e-10 * np.maximum(1, np.abs(lo.values)))


def test_seed_determinism(small_sbm):
    g, _ = small_sbm
    a = smallest_eigs(bethe_hessian(g, 2.0), 3, seed=4)
    b = smallest_eigs(bethe_hessian(g, 2.0), 3, seed=4)
    assert np.array_equal(a.values, b.values) and np.array_equal(a.vectors, b.vectors)


def test_nonconvergence_reports_residuals():
    lg = sample_dcsbm(two_class_symmetric(3000, 6, 4), seed=0)
    g, _ = largest_component(lg.graph)
    with pytest.raises(ConvergenceError) as info:
        smallest_eigs(bethe_hessian(g, 2.0), 6, tol=1e-14, maxiter=2)
    assert "converge" in str(info.value) or info.value.residuals is not None


def test_regular_reg_laplacian_top_is_one():
    g = random_regular(300, 4, seed=0)
    pairs = largest_eigs(reg_sym_laplacian(g, 0.0), 1)
    assert pairs.values[0] == pytest.approx(1.0, abs=1e-10)
    assert abs(abs(pairs.vectors[:, 0].sum()) / np.sqrt(g.n) - 1) < 1e-9


def test_reg_laplacian_large_tau_vanishes():
    g = random_regular(300, 4, seed=1)
    assert abs(largest_eigs(reg_sym_laplacian(g, 1e6), 1).values[0]) < 1e-4


def test_companion_matvec(small_sbm):
    g, _ = small_sbm
    op = CompanionOperator(g)
    z = np.random.default_rng(5).standard_normal(2 * g.n)
    A, D = g.adjacency.toarray(), np.diag(g.degrees)
    I = np.eye(g.n)
    Bp = np.block([[A, I - D], [I, np.zeros_like(A)]])
    assert np.allclose(op.matvec(z), Bp @ z)
    assert np.allclose(op.to_sparse().toarray(), Bp)


@pytest.mark.parametrize("d", [3, 4, 5, 6])
def test_regular_radius(d):
    assert spectral_radius_B(random_regular(400, d, seed=d)) == pytest.approx(d - 1, abs=1e-6)


@pytest.mark.parametrize("n", [5, 50, 2000])
def test_cycle_radius(n):
    assert spectral_radius_B(cycle_graph(n)) == 1.0


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 400), st.integers(0, 2**31))
def test_tree_radius(n, seed):
    g = random_connected_graph(np.random.default_rng(seed), n, 0)
    assert spectral_radius_B(g) <= 1 + 1e-8


def test_radius_matches_dense_on_irregular_graph(small_sbm):
    g, _ = small_sbm
    Bp = CompanionOperator(g).to_sparse().toarray()
    assert spectral_radius_B(g) == pytest.approx(np.max(np.abs(np.linalg.eigvals(Bp))), rel=1e-9)


def test_real_top_eigs_dense_oracle():
    lg = sample_dcsbm(two_class_symmetric(300, 10, 2), seed=1)
    g, _ = largest_component(lg.graph)
    w = np.linalg.eigvals(CompanionOperator(g).to_sparse().toarray())
    real = np.sort(w.real[np.abs(w.imag) < 1e-8 * np.abs(w)])[::-1]
    spec = real_top_eigs_B(g, 2)
    assert spec.complete
    assert np.allclose(spec.values, real[:2], atol=1e-6)


def test_real_top_eigs_arnoldi_path():
    # above the threshold: two real outliers near c*Phi and nu_2*Phi
    lg = sample_dcsbm(two_class_symmetric(5000, 10, 2), seed=2)
    g, _ = largest_component(lg.graph)
    spec = real_top_eigs_B(g, 2, return_vectors=True)
    assert spec.complete
    assert spec.values[0] == pytest.approx(spectral_radius_B(g), rel=1e-8)
    assert spec.values[1] == pytest.approx(4.0, rel=0.1)
    assert spec.vectors.shape == (g.n, 2)


def test_real_top_eigs_regular():
    g = random_regular(500, 5, seed=3)
    assert real_top_eigs_B(g, 1).values[0] == pytest.approx(4.0, abs=1e-6)


def test_trace_grid_endpoints(karate_graph):
    grid = np.linspace(1.0, 2.0, 11)
    tr = bethe_hessian_trace(karate_graph, grid, 3)
    assert tr.shape == (11, 3)
    assert abs(tr[0, 0]) < 1e-10
    dense = np.linalg.eigvalsh(bethe_hessian(karate_graph, 2.0).toarray())[:3]
    assert np.allclose(tr[-1], dense)

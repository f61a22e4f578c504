import numpy as np
import pytest
import scipy.sparse as sp

from conekit import (
    SparseCounts,
    SparseSymAdjacency,
    row_normalize,
    top_k_eigs,
    top_k_svd,
)
from conekit.errors import ConvergenceError, DataError, DegenerateRowError, DimensionError


class TestTopKEigs:
    def test_diagonal_matrix(self):
        spec = top_k_eigs(np.diag([3.0, 2.0, 1.0]), 2)
        assert np.allclose(spec.values, [3.0, 2.0])
        for j, axis in enumerate([0, 1]):
            v = spec.vectors[:, j]
            assert np.allclose(np.abs(v), np.eye(3)[axis], atol=1e-12)
        assert not spec.degenerate

    def test_zero_matrix_flagged_degenerate(self):
        spec = top_k_eigs(np.zeros((4, 4)), 1)
        assert spec.values[0] == pytest.approx(0.0, abs=1e-14)
        assert np.linalg.norm(spec.vectors[:, 0]) == pytest.approx(1.0)
        assert spec.degenerate

    def test_planted_two_block_against_dense_oracle(self):
        # 2-block population: within-block 1, across 0.2
        P = np.full((6, 6), 0.2)
        P[:3, :3] = 1.0
        P[3:, 3:] = 1.0
        spec = top_k_eigs(P, 2)
        # independent full dense decomposition
        w, v = np.linalg.eigh(P)
        order = np.argsort(-np.abs(w))[:2]
        assert np.allclose(spec.values, w[order], atol=1e-9)
        for j in range(2):
            ref = v[:, order[j]]
            got = spec.vectors[:, j]
            assert min(np.abs(got - ref).max(), np.abs(got + ref).max()) < 1e-9

    def test_adjacency_input_matches_dense(self):
        adj = SparseSymAdjacency.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)])
        spec = top_k_eigs(adj, 3)
        w = np.linalg.eigvalsh(adj.to_scipy().toarray())
        order = np.argsort(-np.abs(w))[:3]
        assert np.allclose(spec.values, w[order], atol=1e-9)

    def test_magnitude_selection_takes_negative_outlier(self):
        A = np.diag([1.0, -5.0, 2.0])
        spec = top_k_eigs(A, 2)
        assert np.allclose(spec.values, [-5.0, 2.0])
        alg = top_k_eigs(A, 2, select="algebraic")
        assert np.allclose(alg.values, [2.0, 1.0])

    def test_iterative_path_matches_dense(self):
        rng = np.random.default_rng(3)
        n = 2100  # above the dense threshold
        m = sp.random(n, n, density=2e-3, random_state=5, format="csr")
        m = m + m.T
        spec = top_k_eigs(m, 4)
        w = np.linalg.eigvalsh(m.toarray())
        order = np.argsort(-np.abs(w))[:4]
        assert np.allclose(spec.values, w[order], atol=1e-8 * np.abs(w).max())
        assert np.abs(spec.vectors.T @ spec.vectors - np.eye(4)).max() < 1e-10

    def test_k_out_of_range(self):
        with pytest.raises(DimensionError):
            top_k_eigs(np.eye(3), 4)

    def test_asymmetric_rejected(self):
        A = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(DataError):
            top_k_eigs(A, 1)


class TestTopKSvd:
    def test_diagonal(self):
        spec = top_k_svd(np.diag([5.0, 1.0]), 1)
        assert spec.values[0] == pytest.approx(5.0)
        assert np.abs(spec.vectors[:, 0]).max() == pytest.approx(1.0)

    def test_rank_one_outer_product(self):
        a = np.array([1.0, 2.0, 2.0])
        b = np.array([3.0, 4.0])
        spec = top_k_svd(np.outer(a, b), 1)
        assert spec.values[0] == pytest.approx(np.linalg.norm(a) * np.linalg.norm(b))

    def test_random_matrix_against_dense_oracle(self):
        rng = np.random.default_rng(12345)
        U = rng.standard_normal((20, 30))
        spec = top_k_svd(U, 3)
        ref = np.linalg.svd(U, compute_uv=False)[:3]
        assert np.allclose(spec.values, ref, atol=1e-9)
        # residual contract on the returned triple
        res = np.linalg.norm(U.T @ spec.vectors - spec.right_vectors * spec.values, axis=0)
        assert res.max() < 1e-9 * spec.values[0]

    def test_k_too_large(self):
        with pytest.raises(DimensionError):
            top_k_svd(np.ones((3, 2)), 3)


class TestRowNormalize:
    def test_three_four_five(self):
        out = row_normalize(np.array([[3.0, 4.0]]))
        assert np.allclose(out.Y, [[0.6, 0.8]])
        assert out.norms[0] == pytest.approx(5.0)

    def test_zero_row_rejected(self):
        with pytest.raises(DegenerateRowError) as err:
            row_normalize(np.array([[1.0, 0.0], [0.0, 0.0]]))
        assert err.value.indices == [1]

    def test_identity_unchanged(self):
        out = row_normalize(np.eye(4))
        assert np.allclose(out.Y, np.eye(4), atol=1e-15)
        assert np.allclose(out.norms, 1.0, atol=1e-15)


class TestAdjacencyType:
    def test_duplicate_edge_rejected(self):
        with pytest.raises(DataError):
            SparseSymAdjacency.from_edges(3, [(0, 1), (1, 0)])

    def test_self_loop_rejected(self):
        with pytest.raises(DataError):
            SparseSymAdjacency.from_edges(3, [(1, 1)])

    def test_symmetric_round_trip(self):
        adj = SparseSymAdjacency.from_edges(4, [(2, 0, 0.5), (1, 3)])
        m = adj.to_scipy().toarray()
        assert np.allclose(m, m.T)
        assert np.allclose(np.diag(m), 0.0)
        assert m[0, 2] == 0.5 and m[1, 3] == 1.0
        assert np.allclose(adj.degrees(), m.sum(axis=1))


class TestCountsType:
    def test_totals(self):
        c = SparseCounts(3, 2, [0, 2, 2], [0, 0, 1], [4, 1, 7])
        assert c.word_totals().tolist() == [4, 0, 8]
        assert c.doc_totals().tolist() == [5, 7]

    def test_negative_count_rejected(self):
        with pytest.raises(DataError):
            SparseCounts(2, 2, [0], [0], [-1])

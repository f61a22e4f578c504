import numpy as np
import pytest
import scipy.sparse as sp

from conekit import (
    SimConfig,
    SparseCounts,
    binarize_memberships,
    fit_dcmmsb,
    fit_sbmo,
    fit_topics,
    fit_topics_population,
    gen_dcmmsb,
    gen_occam,
    gen_sbmo,
    gen_topics,
    l1_topic_error,
    perm_match,
    planted_word_topic,
    remove_empty_words,
    remove_isolated_nodes,
    split_documents,
)
from conekit.errors import (
    DegenerateNodeError,
    DegenerateWordError,
    DimensionError,
    RankError,
    SpectrumInconsistencyError,
)
from conekit.metrics import align_columns
from conekit.rng import TAG_DOC_SPLIT, keyed_rng

from conftest import dcmmsb_config


def two_block_population(n=6, b_off=0.2, rho=1.0):
    """Planted two-block SBM population with unit degree parameters."""
    theta = np.zeros((n, 2))
    theta[: n // 2, 0] = 1.0
    theta[n // 2:, 1] = 1.0
    B = np.array([[1.0, b_off], [b_off, 1.0]])
    P = rho * theta @ B @ theta.T
    return P, theta, B


class TestFitDcmmsb:
    def test_two_block_ideal(self):
        P, theta, B = two_block_population(rho=0.9)
        est = fit_dcmmsb(P, 2, p=1)
        m = perm_match(theta, est.memberships, "l1")
        assert np.abs(theta - align_columns(est.memberships, m)).max() < 1e-8
        B_aligned = est.block_matrix[np.ix_(m.permutation, m.permutation)]
        assert np.abs(B_aligned - B).max() < 1e-8
        assert np.abs(est.degrees - 1.0).max() < 1e-8

    @pytest.mark.parametrize("p", [1, 2])
    def test_row_normalization_contract(self, p):
        cfg = dcmmsb_config(3, n=50)
        adj, truth, pop = gen_dcmmsb(cfg)
        est = fit_dcmmsb(pop.dense_lowrank(), 3, p=p)
        norms = np.linalg.norm(est.memberships, ord=p, axis=1)
        assert np.abs(norms - 1.0).max() < 1e-10
        assert est.memberships.min() >= 0
        assert abs(est.degrees.sum() - 50) < 1e-8
        assert est.block_matrix.max() == pytest.approx(1.0)
        assert np.abs(est.block_matrix - est.block_matrix.T).max() < 1e-8

    def test_population_exactness_all_models(self):
        cfg = dcmmsb_config(11, n=70, k=3)
        adj, truth, pop = gen_dcmmsb(cfg)
        est = fit_dcmmsb(pop.dense_lowrank(), 3, p=1)
        m = perm_match(truth.memberships, est.memberships, "l1")
        assert np.abs(truth.memberships
                      - align_columns(est.memberships, m)).max() < 1e-6
        assert np.abs(truth.degrees - est.degrees).max() < 1e-6
        B_aligned = est.block_matrix[np.ix_(m.permutation, m.permutation)]
        assert np.abs(truth.block_matrix - B_aligned).max() < 1e-6

    def test_isolated_node_listed(self):
        adj_mat = np.zeros((5, 5))
        adj_mat[0, 1] = adj_mat[1, 0] = 1.0
        adj_mat[2, 3] = adj_mat[3, 2] = 1.0
        with pytest.raises(DegenerateNodeError) as err:
            fit_dcmmsb(adj_mat, 2)
        assert err.value.indices == [4]

    def test_k_exceeding_rank(self):
        P, theta, B = two_block_population()
        with pytest.raises(RankError):
            fit_dcmmsb(P, 3)

    def test_negative_corner_energy_rejected(self):
        # rank-2 symmetric matrix whose dominant eigenvalue is negative and
        # whose rows all lean on that direction: every corner's spectral
        # energy is clearly negative
        raw = np.array([[1.0, 0.1], [1.0, -0.1], [0.9, 0.15], [0.95, -0.05]])
        q, _ = np.linalg.qr(raw)
        A = q @ np.diag([-2.0, 1.0]) @ q.T
        with pytest.raises(SpectrumInconsistencyError):
            fit_dcmmsb(A, 2)


class TestFitSbmo:
    def test_planted_overlap_recovered(self):
        cfg = SimConfig(k=3, seed=5, n=60, b_spec=(1.0, 0.2), rho=0.3,
                        overlap_fraction=0.3)
        adj, truth, pop = gen_sbmo(cfg)
        est = fit_sbmo(pop.dense_lowrank(), 3)
        m = perm_match(truth.memberships, est.memberships, "l1")
        Z = est.binary_memberships[:, m.permutation]
        assert np.array_equal(Z, truth.binary_memberships)

    def test_pure_sbm_one_hot(self):
        cfg = SimConfig(k=3, seed=6, n=45, b_spec=(1.0, 0.15), rho=0.5,
                        overlap_fraction=0.0)
        adj, truth, pop = gen_sbmo(cfg)
        est = fit_sbmo(pop.dense_lowrank(), 3)
        assert np.array_equal(est.binary_memberships.sum(axis=1),
                              np.ones(45, dtype=np.int64))

    def test_threshold_boundary_closed(self):
        Z = binarize_memberships(np.array([[0.5, 0.5]]), 2)
        assert Z.tolist() == [[True, True]]

    def test_boundary_entries_included(self):
        Z = binarize_memberships(np.array([[0.2, 0.3, 0.25, 0.25]]), 4)
        assert Z.tolist() == [[False, True, True, True]]

    def test_empty_row_keeps_argmax(self):
        # only numerically perturbed rows can land fully under the
        # threshold; the largest entry is then forced on
        Z = binarize_memberships(np.array([[0.2, 0.24, 0.2, 0.2]]), 4)
        assert Z.tolist() == [[False, True, False, False]]


class TestSplitDocuments:
    def _counts(self, cols):
        m = sp.csc_matrix(np.asarray(cols, dtype=float))
        return SparseCounts.from_scipy(m)

    def test_conservation(self):
        A = self._counts([[2], [0], [4]])
        out = split_documents(A, rng_seed=0)
        a1 = out.first.to_scipy().toarray()
        a2 = out.second.to_scipy().toarray()
        assert a1.sum() == 3 and a2.sum() == 3
        assert np.array_equal(a1 + a2, [[2], [0], [4]])

    def test_single_token_goes_to_first(self):
        A = self._counts([[1], [0]])
        out = split_documents(A, rng_seed=1)
        assert out.first.to_scipy().toarray().sum() == 1
        assert out.second.counts.size == 0

    def test_odd_totals_differ_by_one(self):
        A = self._counts([[3], [4]])
        out = split_documents(A, rng_seed=2)
        assert out.first.doc_totals()[0] == 4
        assert out.second.doc_totals()[0] == 3

    def test_cell_marginal_matches_hypergeometric_mean(self):
        # doc with counts (10, 10): the second half draws 10 of 20 tokens,
        # so the word-0 count in the first half has mean 5
        A = self._counts([[10], [10]])
        total = 0
        reps = 20000
        for seed in range(reps):
            out = split_documents(A, rng_seed=seed)
            dense = out.first.to_scipy().toarray()
            total += dense[0, 0]
        mean = total / reps
        # std of one draw is sqrt(10*.5*.5*10/19)/; 4 sigma of the mean
        assert abs(mean - 5.0) < 0.1

    def test_split_independent_of_other_docs(self):
        # the per-document stream only depends on (seed, doc index)
        A = self._counts([[4, 6], [4, 2]])
        B = self._counts([[4, 0], [4, 0]])
        sa = split_documents(A, rng_seed=9)
        sb = split_documents(B, rng_seed=9)
        assert np.array_equal(sa.first.to_scipy().toarray()[:, 0],
                              sb.first.to_scipy().toarray()[:, 0])


class TestFitTopics:
    def test_population_exactness(self):
        cfg = SimConfig(k=3, seed=11, n_words=30, n_docs=100, tokens_per_doc=50)
        T = planted_word_topic(cfg)
        mix = np.eye(3) * 0.5 + 0.1
        est = fit_topics_population(T @ mix @ T.T, 3)
        assert l1_topic_error(T, est.word_topic) < 1e-6

    def test_column_stochastic_output(self):
        cfg = SimConfig(k=3, seed=2, n_words=40, n_docs=60, tokens_per_doc=80,
                        doc_topic_alpha=0.05)
        counts, truth = gen_topics(cfg)
        filtered, kept = remove_empty_words(counts)
        est = fit_topics(filtered, 3, rng_seed=2)
        assert est.word_topic.min() >= 0
        assert np.abs(est.word_topic.sum(axis=0) - 1.0).max() < 1e-10

    def test_empty_word_rejected_with_indices(self):
        counts = SparseCounts(4, 3, [0, 1, 3], [0, 1, 2], [2, 3, 4])
        with pytest.raises(DegenerateWordError) as err:
            fit_topics(counts, 2)
        assert err.value.indices == [2]

    def test_too_few_documents(self):
        counts = SparseCounts(4, 2, [0, 1, 2, 3], [0, 1, 0, 1], [1, 1, 1, 1])
        with pytest.raises(DimensionError):
            fit_topics(counts, 3)

    def test_doc_order_invariance_given_splits(self):
        cfg = SimConfig(k=3, seed=4, n_words=30, n_docs=40, tokens_per_doc=60,
                        doc_topic_alpha=0.05)
        counts, truth = gen_topics(cfg)
        halves = split_documents(counts, rng_seed=4)
        a1 = halves.first.to_scipy().toarray()
        a2 = halves.second.to_scipy().toarray()

        def cooc(m1, m2):
            s1 = m1 / np.maximum(m1.sum(axis=0, keepdims=True), 1e-300)
            s2 = m2 / np.maximum(m2.sum(axis=0, keepdims=True), 1e-300)
            return s1 @ s2.T

        perm = np.random.default_rng(0).permutation(40)
        assert np.abs(cooc(a1, a2) - cooc(a1[:, perm], a2[:, perm])).max() < 1e-12


class TestRepairHelpers:
    def test_remove_empty_words_mapping(self):
        counts = SparseCounts(5, 2, [0, 4], [0, 1], [2, 3])
        filtered, kept = remove_empty_words(counts)
        assert kept.tolist() == [0, 4]
        assert filtered.n_words == 2
        assert filtered.word_totals().tolist() == [2, 3]

    def test_remove_isolated_nodes_mapping(self):
        from conekit import SparseSymAdjacency
        adj = SparseSymAdjacency.from_edges(5, [(0, 2), (2, 4)])
        sub, kept = remove_isolated_nodes(adj)
        assert kept.tolist() == [0, 2, 4]
        assert sub.n == 3
        m = sub.to_scipy().toarray()
        assert m[0, 1] == 1.0 and m[1, 2] == 1.0

"""Model-specific estimators built on the cone pipeline.

Degree-corrected mixed-membership networks (l1 or l2 row normalization of
the membership matrix), overlapping blockmodels with binary memberships,
and bag-of-words topic models via the split-document co-occurrence matrix.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .cone import ConeDiagnostics, ConeSolution, auto_delta, check_condition, svm_cone
from .errors import (
    DegenerateNodeError,
    DegenerateWordError,
    DimensionError,
    RankError,
    SpectrumInconsistencyError,
)
from .rng import TAG_DOC_SPLIT, keyed_rng
from .spectral import (
    SparseCounts,
    SparseSymAdjacency,
    row_normalize,
    top_k_eigs,
    top_k_svd,
)

_RANK_TOL = 1e-12
_SQRT_CLAMP = -1e-8


@dataclass(frozen=True)
class NetworkParams:
    """Parameters of a degree-corrected overlapping blockmodel.

    ``memberships`` rows have unit l1 norm (norm_order=1) or l2 norm
    (norm_order=2); ``degrees`` sum to n; ``block_matrix`` is symmetric with
    max entry 1 after estimation.  ``binary_memberships`` is populated for
    the overlapping-blockmodel variant only.
    """

    memberships: np.ndarray
    degrees: np.ndarray
    block_matrix: np.ndarray
    density: float
    norm_order: int
    binary_memberships: np.ndarray | None = None

    @property
    def n_nodes(self):
        return self.memberships.shape[0]

    @property
    def n_communities(self):
        return self.memberships.shape[1]

    def validate(self, atol=1e-8):
        n = self.n_nodes
        rn = np.linalg.norm(self.memberships, ord=self.norm_order, axis=1)
        if np.abs(rn - 1.0).max() > 1e-10:
            raise ValueError("membership rows are not unit normalized")
        if abs(self.degrees.sum() - n) > atol:
            raise ValueError("degree parameters do not sum to n")
        if np.abs(self.block_matrix - self.block_matrix.T).max() > atol:
            raise ValueError("block matrix is not symmetric")
        if abs(self.block_matrix.max() - 1.0) > atol:
            raise ValueError("block matrix max entry is not 1")


@dataclass(frozen=True)
class TopicParams:
    """Word-topic distributions (and, for planted truths, topic-document)."""

    word_topic: np.ndarray
    topic_doc: np.ndarray | None = None
    tokens_per_doc: int | None = None

    @property
    def n_words(self):
        return self.word_topic.shape[0]

    @property
    def n_topics(self):
        return self.word_topic.shape[1]


@dataclass(frozen=True)
class SplitCounts:
    """A count matrix split into two halves, A = first + second entrywise."""

    first: SparseCounts
    second: SparseCounts
    half_tokens: np.ndarray


@dataclass(frozen=True)
class FitDetails:
    """Cone-pipeline internals attached to a fitted model."""

    cone: ConeSolution
    diagnostics: ConeDiagnostics
    eigenvalues: np.ndarray


def _np_lp_rows(M, p):
    if p == 1:
        return np.abs(M).sum(axis=1)
    return np.linalg.norm(M, axis=1)


def _check_rank(values, K, kind):
    top = np.abs(values).max(initial=0.0)
    if top <= 0 or np.abs(values).min() <= _RANK_TOL * top:
        raise RankError(f"input has fewer than K={K} significant {kind}")


def fit_dcmmsb(A, K, p=1, rng_seed=0, delta=None, eig_select="magnitude",
               return_details=False):
    """Estimate memberships, degree parameters, and the block matrix.

    ``A`` is a SparseSymAdjacency, a scipy sparse symmetric matrix, or a
    dense symmetric matrix (feed the population matrix directly for the
    noiseless path).  ``p`` selects the membership row normalization: 1 for
    the Dirichlet-style model, 2 for the l2-normalized variant.  ``delta``
    overrides the adaptive band search with a fixed band width (as a
    multiple of the fitted margin).  ``eig_select`` is passed to the
    eigensolver; "algebraic" is the right choice for sparse assortative
    graphs, where magnitude selection can capture the negative noise edge.
    """
    if K < 2:
        raise DimensionError("K must be at least 2")
    if p not in (1, 2):
        raise DimensionError("p must be 1 or 2")

    if isinstance(A, SparseSymAdjacency):
        n = A.n
        iso = np.flatnonzero(A.degrees() == 0)
    elif sp.issparse(A):
        n = A.shape[0]
        iso = np.flatnonzero(np.asarray(abs(A).sum(axis=1)).ravel() == 0)
    else:
        A = np.asarray(A, dtype=float)
        n = A.shape[0]
        iso = np.flatnonzero(np.abs(A).sum(axis=1) == 0)
    if iso.size:
        raise DegenerateNodeError(iso.tolist())
    if n < K:
        raise DimensionError(f"K={K} exceeds node count {n}")

    spectrum = top_k_eigs(A, K, select=eig_select)
    _check_rank(spectrum.values, K, "eigenvalues")
    V, evals = spectrum.vectors, spectrum.values

    if delta is None:
        sol = auto_delta(V, K, rng_seed=rng_seed)
    else:
        sol = svm_cone(V, K, float(delta), rng_seed=rng_seed)

    M, C = sol.weights, sol.corners
    norms = np.linalg.norm(V, axis=1)
    Yc = V[C] / norms[C][:, None]

    d_sq = np.einsum("ij,j,ij->i", Yc, evals, Yc)
    if d_sq.min() < _SQRT_CLAMP:
        raise SpectrumInconsistencyError(
            f"corner spectral energy {d_sq.min():.3e} is negative beyond tolerance"
        )
    D = np.sqrt(np.clip(d_sq, 0.0, None))

    MD = M * D[None, :]
    F = _np_lp_rows(MD, p)
    tiny = np.flatnonzero(F < 1e-300)
    if tiny.size:
        raise DegenerateNodeError(tiny.tolist())
    theta = np.clip(MD / F[:, None], 0.0, None)
    theta /= _np_lp_rows(theta, p)[:, None]

    gamma = n * F / F.sum()
    gc = gamma[C]
    B_raw = (V[C] * evals[None, :]) @ V[C].T / np.outer(gc, gc)
    B_raw = 0.5 * (B_raw + B_raw.T)
    flat = int(np.argmax(B_raw))
    scale = float(B_raw.flat[flat])
    if scale <= 0:
        raise RankError("block matrix estimate has no positive entries")
    if flat // K != flat % K:
        warnings.warn(
            "largest block-matrix entry is off-diagonal; unit-diagonal "
            "identifiability is violated by the noise",
            RuntimeWarning,
        )
    B = B_raw / scale

    params = NetworkParams(
        memberships=theta, degrees=gamma, block_matrix=B,
        density=scale, norm_order=p,
    )
    if return_details:
        diag = check_condition(row_normalize(V).Y[C], Z=None)
        return params, FitDetails(cone=sol, diagnostics=diag, eigenvalues=evals)
    return params


def binarize_memberships(theta, K):
    """Threshold membership rows at 1/K (closed comparison).

    Rows that would become all-false keep their largest entry.
    """
    Z = theta >= (1.0 / K)
    empty = np.flatnonzero(~Z.any(axis=1))
    if empty.size:
        Z[empty, np.argmax(theta[empty], axis=1)] = True
    return Z


def fit_sbmo(A, K, rng_seed=0, delta=None, eig_select="magnitude",
             return_details=False):
    """Overlapping-blockmodel fit: l1 memberships thresholded to binary."""
    out = fit_dcmmsb(A, K, p=1, rng_seed=rng_seed, delta=delta,
                     eig_select=eig_select, return_details=return_details)
    params = out[0] if return_details else out
    Z = binarize_memberships(params.memberships, K)
    params = NetworkParams(
        memberships=params.memberships, degrees=params.degrees,
        block_matrix=params.block_matrix, density=params.density,
        norm_order=1, binary_memberships=Z,
    )
    if return_details:
        return params, out[1]
    return params


def split_documents(A, rng_seed):
    """Split each document's tokens uniformly at random into two halves.

    Per document with t tokens, exactly floor(t/2) tokens go to the second
    half via one multivariate-hypergeometric draw over its word counts (no
    token materialization); the rest stay in the first half.  Draws are
    keyed by (seed, document), so the split of a document is independent of
    processing order.
    """
    csc = A.to_scipy().tocsc()
    csc.sort_indices()
    indptr, indices = csc.indptr, csc.indices
    data = np.round(csc.data).astype(np.int64)
    first = data.copy()
    second = np.zeros_like(data)
    for d in range(A.n_docs):
        lo, hi = indptr[d], indptr[d + 1]
        if lo == hi:
            continue
        col = data[lo:hi]
        take = int(col.sum()) // 2
        if take == 0:
            continue
        rng = keyed_rng(rng_seed, TAG_DOC_SPLIT, d)
        drawn = rng.multivariate_hypergeometric(col, take, method="marginals")
        second[lo:hi] = drawn
        first[lo:hi] = col - drawn

    def build(values):
        keep = values > 0
        rows = indices[keep]
        cols = np.repeat(np.arange(A.n_docs), np.diff(indptr))[keep]
        return SparseCounts(A.n_words, A.n_docs, rows, cols, values[keep])

    totals = A.doc_totals()
    return SplitCounts(first=build(first), second=build(second),
                       half_tokens=totals // 2)


def _column_l1_normalize(m):
    m = m.tocsc(copy=True)
    sums = np.asarray(m.sum(axis=0)).ravel()
    scale = np.divide(1.0, sums, out=np.zeros_like(sums, dtype=float),
                      where=sums > 0)
    return m @ sp.diags(scale)


def _cone_topics(U, K, rng_seed, delta, return_details):
    zero_rows = np.flatnonzero(np.abs(U).sum(axis=1) == 0)
    if zero_rows.size:
        raise DegenerateWordError(zero_rows.tolist())
    spectrum = top_k_svd(U, K)
    _check_rank(spectrum.values, K, "singular values")
    V = spectrum.vectors
    if delta is None:
        sol = auto_delta(V, K, rng_seed=rng_seed)
    else:
        sol = svm_cone(V, K, float(delta), rng_seed=rng_seed)
    T = np.clip(sol.weights, 0.0, None)
    col = T.sum(axis=0)
    if np.any(col <= 0):
        raise RankError("a topic column collapsed to zero mass")
    T = T / col[None, :]
    params = TopicParams(word_topic=T)
    if return_details:
        diag = check_condition(row_normalize(V).Y[sol.corners])
        return params, FitDetails(cone=sol, diagnostics=diag,
                                  eigenvalues=spectrum.values)
    return params


def fit_topics(A, K, rng_seed=0, delta=None, return_details=False):
    """Estimate word-topic distributions from a count matrix.

    Splits documents, column-normalizes the halves, and runs the cone
    pipeline on the left singular vectors of the half co-occurrence matrix.
    Words that never occur must be removed first (see remove_empty_words).
    """
    totals = A.word_totals()
    empty = np.flatnonzero(totals == 0)
    if empty.size:
        raise DegenerateWordError(empty.tolist())
    if A.n_docs < K:
        raise DimensionError(f"need at least K={K} documents, have {A.n_docs}")
    halves = split_documents(A, rng_seed)
    U = (_column_l1_normalize(halves.first.to_scipy())
         @ _column_l1_normalize(halves.second.to_scipy()).T).toarray()
    return _cone_topics(U, K, rng_seed, delta, return_details)


def fit_topics_population(cooc, K, rng_seed=0, delta=None, return_details=False):
    """Noiseless path: run the cone pipeline on a population co-occurrence
    matrix (word-probability matrix times its transpose)."""
    cooc = np.asarray(cooc, dtype=float)
    if cooc.ndim != 2 or cooc.shape[0] != cooc.shape[1]:
        raise DimensionError("population co-occurrence must be square")
    return _cone_topics(cooc, K, rng_seed, delta, return_details)


def remove_empty_words(A):
    """Drop words with zero total count; returns (filtered, kept indices)."""
    totals = A.word_totals()
    kept = np.flatnonzero(totals > 0)
    remap = -np.ones(A.n_words, dtype=np.int64)
    remap[kept] = np.arange(kept.size)
    return (
        SparseCounts(kept.size, A.n_docs, remap[A.words], A.docs, A.counts),
        kept,
    )


def remove_isolated_nodes(adj):
    """Drop zero-degree nodes; returns (subgraph, kept indices).

    The estimators refuse isolated nodes rather than dropping them
    silently; batch harnesses use this to repair sampled graphs first and
    keep the node index map explicit.
    """
    kept = np.flatnonzero(adj.degrees() > 0)
    remap = -np.ones(adj.n, dtype=np.int64)
    remap[kept] = np.arange(kept.size)
    return (
        SparseSymAdjacency(kept.size, remap[adj.rows], remap[adj.cols],
                           adj.weights),
        kept,
    )

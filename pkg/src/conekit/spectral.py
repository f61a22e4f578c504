"""Truncated eigendecomposition / SVD and row normalization.

These are the linear-algebra primitives that turn an observed matrix into
unit-sphere cone inputs: the top-K spectrum of a symmetric observation, the
top-K singular triple of a rectangular one, and row normalization onto the
unit sphere.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    ConvergenceError,
    DataError,
    DegenerateRowError,
    DimensionError,
)
from .rng import TAG_GENERIC, keyed_rng

DENSE_THRESHOLD = 2048
_RESIDUAL_RTOL = 1e-9
# magnitude below which a returned eigen/singular value is treated as zero
_DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class SparseSymAdjacency:
    """Undirected weighted graph with zero diagonal.

    Stores the strict upper triangle as sorted coordinate lists; the matrix
    is symmetric by construction and never carries self-loops.
    """

    n: int
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        weights = np.asarray(self.weights, dtype=float)
        if not (rows.shape == cols.shape == weights.shape):
            raise DimensionError("entry arrays must have matching lengths")
        if rows.size:
            if rows.min() < 0 or cols.max() >= self.n or cols.min() < 0 or rows.max() >= self.n:
                raise DataError("edge endpoint out of range")
            if np.any(rows == cols):
                raise DataError("self-loops are not allowed")
            if not np.all(np.isfinite(weights)) or np.any(weights < 0):
                raise DataError("edge weights must be finite and non-negative")
            lo = np.minimum(rows, cols)
            hi = np.maximum(rows, cols)
            order = np.lexsort((hi, lo))
            lo, hi, weights = lo[order], hi[order], weights[order]
            dup = (lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1])
            if np.any(dup):
                k = int(np.flatnonzero(dup)[0])
                raise DataError(f"duplicate edge ({lo[k]}, {hi[k]})")
            object.__setattr__(self, "rows", lo)
            object.__setattr__(self, "cols", hi)
            object.__setattr__(self, "weights", weights)
        else:
            object.__setattr__(self, "rows", rows)
            object.__setattr__(self, "cols", cols)
            object.__setattr__(self, "weights", weights)

    @property
    def n_edges(self):
        return int(self.rows.size)

    @classmethod
    def from_edges(cls, n, edges):
        """Build from an iterable of (i, j) or (i, j, weight) tuples."""
        rows, cols, weights = [], [], []
        for e in edges:
            if len(e) == 2:
                i, j = e
                w = 1.0
            else:
                i, j, w = e
            rows.append(i)
            cols.append(j)
            weights.append(w)
        return cls(n, np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64),
                   np.array(weights, dtype=float))

    def to_scipy(self):
        """Symmetric CSR matrix."""
        m = sp.coo_matrix(
            (
                np.concatenate([self.weights, self.weights]),
                (np.concatenate([self.rows, self.cols]),
                 np.concatenate([self.cols, self.rows])),
            ),
            shape=(self.n, self.n),
        )
        return m.tocsr()

    def degrees(self):
        d = np.zeros(self.n)
        np.add.at(d, self.rows, self.weights)
        np.add.at(d, self.cols, self.weights)
        return d


@dataclass(frozen=True)
class SparseCounts:
    """Word-document count matrix in coordinate form (V rows, D columns)."""

    n_words: int
    n_docs: int
    words: np.ndarray
    docs: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        words = np.asarray(self.words, dtype=np.int64)
        docs = np.asarray(self.docs, dtype=np.int64)
        counts = np.asarray(self.counts, dtype=np.int64)
        if not (words.shape == docs.shape == counts.shape):
            raise DimensionError("entry arrays must have matching lengths")
        if words.size:
            if words.min() < 0 or words.max() >= self.n_words:
                raise DataError("word index out of range")
            if docs.min() < 0 or docs.max() >= self.n_docs:
                raise DataError("document index out of range")
            if counts.min() < 0:
                raise DataError("counts must be non-negative")
        object.__setattr__(self, "words", words)
        object.__setattr__(self, "docs", docs)
        object.__setattr__(self, "counts", counts)

    def to_scipy(self):
        return sp.coo_matrix(
            (self.counts.astype(float), (self.words, self.docs)),
            shape=(self.n_words, self.n_docs),
        ).tocsc()

    def word_totals(self):
        t = np.zeros(self.n_words, dtype=np.int64)
        np.add.at(t, self.words, self.counts)
        return t

    def doc_totals(self):
        t = np.zeros(self.n_docs, dtype=np.int64)
        np.add.at(t, self.docs, self.counts)
        return t

    @classmethod
    def from_scipy(cls, m):
        coo = sp.coo_matrix(m)
        keep = coo.data != 0
        return cls(coo.shape[0], coo.shape[1],
                   coo.row[keep], coo.col[keep],
                   np.round(coo.data[keep]).astype(np.int64))


@dataclass(frozen=True)
class Spectrum:
    """Top-K eigenpairs or singular triple of an observed matrix.

    ``vectors`` holds orthonormal columns (eigenvectors, or left singular
    vectors); ``values`` are signed eigenvalues sorted by descending
    magnitude, or non-negative singular values sorted descending.
    """

    vectors: np.ndarray
    values: np.ndarray
    kind: str
    right_vectors: np.ndarray | None = None
    degenerate: bool = False


@dataclass(frozen=True)
class NormalizedRows:
    """Unit-sphere projection of a data matrix: Y has unit l2 rows."""

    Y: np.ndarray
    norms: np.ndarray


def _as_operator(A):
    """Return (linear form, n, kind) for adjacency / sparse / dense input."""
    if isinstance(A, SparseSymAdjacency):
        return A.to_scipy(), A.n, "adjacency"
    if sp.issparse(A):
        if A.shape[0] != A.shape[1]:
            raise DimensionError("symmetric input must be square")
        asym = abs(A - A.T)
        scale = max(abs(A).max(), 1.0) if A.nnz else 1.0
        if asym.nnz and asym.max() > 1e-10 * scale:
            raise DataError("input matrix is not symmetric")
        return A.tocsr(), A.shape[0], "sparse"
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError("symmetric input must be a square matrix")
    if not np.all(np.isfinite(A)):
        raise DataError("input matrix has non-finite entries")
    scale = max(np.abs(A).max(), 1.0)
    if np.abs(A - A.T).max() > 1e-10 * scale:
        raise DataError("input matrix is not symmetric")
    return A, A.shape[0], "dense"


def _check_eig_residuals(op, vectors, values):
    top = np.abs(values).max(initial=0.0)
    av = op @ vectors
    res = np.linalg.norm(av - vectors * values[None, :], axis=0)
    if np.any(res > _RESIDUAL_RTOL * max(top, np.finfo(float).tiny)):
        worst = float(res.max())
        raise ConvergenceError(
            f"eigenpair residual {worst:.3e} exceeds tolerance", residual=worst
        )
    return res


def top_k_eigs(A, K, select="magnitude"):
    """K principal eigenpairs of a symmetric matrix.

    ``select`` picks eigenvalues by absolute value ("magnitude", the
    default, correct for block structures with negative eigenvalues) or by
    algebraic value ("algebraic", which avoids capturing the negative
    noise edge of sparse assortative graphs).  Returned values are always
    sorted by descending magnitude.

    Dense symmetric decomposition for small problems, implicitly restarted
    Lanczos with a fixed-seed start vector above ``DENSE_THRESHOLD``.
    """
    if select not in ("magnitude", "algebraic"):
        raise DimensionError(f"unknown eigenvalue selection {select!r}")
    op, n, _ = _as_operator(A)
    if K < 1 or K > n:
        raise DimensionError(f"K={K} out of range for n={n}")

    if n <= DENSE_THRESHOLD or K >= n - 1:
        dense = op.toarray() if sp.issparse(op) else np.asarray(op)
        values, vectors = np.linalg.eigh(dense)
        if select == "magnitude":
            pick = np.lexsort((-values, -np.abs(values)))[:K]
        else:
            pick = np.argsort(-values)[:K]
        values = values[pick]
        vectors = vectors[:, pick]
    else:
        v0 = keyed_rng(0xC09E, TAG_GENERIC, 0).standard_normal(n)
        which = "LM" if select == "magnitude" else "LA"
        try:
            values, vectors = spla.eigsh(op, k=K, which=which, v0=v0)
        except spla.ArpackNoConvergence as exc:
            raise ConvergenceError(
                f"eigensolver did not converge: {exc}", residual=None
            ) from exc
    order = np.lexsort((-values, -np.abs(values)))
    values = values[order]
    vectors = vectors[:, order]

    _check_eig_residuals(op, vectors, values)
    top = np.abs(values).max(initial=0.0)
    degenerate = bool(top < _DEGENERATE_TOL or np.abs(values).min() <= _DEGENERATE_TOL * top)
    return Spectrum(vectors=vectors, values=values, kind="eigen", degenerate=degenerate)


def top_k_svd(U, K):
    """Top-K singular triple of a dense or sparse rectangular matrix."""
    if sp.issparse(U):
        rows, cols = U.shape
        dense_ok = max(rows, cols) <= DENSE_THRESHOLD
    else:
        U = np.asarray(U, dtype=float)
        if U.ndim != 2:
            raise DimensionError("input must be a matrix")
        if not np.all(np.isfinite(U)):
            raise DataError("input matrix has non-finite entries")
        rows, cols = U.shape
        dense_ok = True
    if K < 1 or K > min(rows, cols):
        raise DimensionError(f"K={K} out of range for shape {(rows, cols)}")

    if dense_ok and (max(rows, cols) <= DENSE_THRESHOLD or K >= min(rows, cols) - 1):
        dense = U.toarray() if sp.issparse(U) else U
        uu, ss, vvt = np.linalg.svd(dense, full_matrices=False)
        left, vals, right = uu[:, :K], ss[:K], vvt[:K, :].T
    else:
        v0 = keyed_rng(0xC09E, TAG_GENERIC, 1).standard_normal(min(rows, cols))
        try:
            uu, ss, vvt = spla.svds(U, k=K, which="LM", v0=v0)
        except spla.ArpackNoConvergence as exc:
            raise ConvergenceError(
                f"SVD solver did not converge: {exc}", residual=None
            ) from exc
        order = np.argsort(-ss)
        left, vals, right = uu[:, order], ss[order], vvt[order, :].T

    top = vals.max(initial=0.0)
    res = np.linalg.norm(U.T @ left - right * vals[None, :], axis=0)
    if np.any(res > _RESIDUAL_RTOL * max(top, np.finfo(float).tiny)):
        worst = float(res.max())
        raise ConvergenceError(
            f"singular triple residual {worst:.3e} exceeds tolerance", residual=worst
        )
    degenerate = bool(top < _DEGENERATE_TOL or vals.min() <= _DEGENERATE_TOL * top)
    return Spectrum(vectors=left, values=vals, kind="svd",
                    right_vectors=right, degenerate=degenerate)


def row_normalize(Z):
    """Divide each row by its l2 norm; rows must be nonzero.

    Returns the normalized matrix together with the original row norms, so
    callers can undo the scaling.
    """
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.size == 0:
        raise DimensionError("input must be a non-empty matrix")
    if not np.all(np.isfinite(Z)):
        raise DataError("input matrix has non-finite entries")
    norms = np.linalg.norm(Z, axis=1)
    bad = np.flatnonzero(norms < 1e-300)
    if bad.size:
        raise DegenerateRowError(bad.tolist())
    return NormalizedRows(Y=Z / norms[:, None], norms=norms)

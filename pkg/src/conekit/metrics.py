"""Permutation-matched evaluation of estimated parameter matrices.

Estimates are identifiable only up to a relabeling of the K columns, so
every metric first finds the best column permutation: exhaustively for
K <= 8, by Hungarian assignment on the per-column loss matrix above that
(exact for the additive losses used here).
"""

from dataclasses import dataclass
from itertools import permutations

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.stats import rankdata

from .errors import DimensionError, UndefinedCorrelationError

_EXHAUSTIVE_LIMIT = 8
LOSSES = ("l1", "l2", "neg_spearman")


@dataclass(frozen=True)
class MatchResult:
    """Best column matching between a truth and an estimate.

    ``permutation[j]`` is the estimate column matched to truth column j;
    ``loss`` aggregates ``per_column_loss`` (sum for l1 and neg_spearman,
    root of summed squares for l2).
    """

    permutation: np.ndarray
    loss: float
    per_column_loss: np.ndarray
    loss_kind: str


def _spearman(a, b):
    ra = rankdata(a, method="average")
    rb = rankdata(b, method="average")
    sa, sb = ra.std(), rb.std()
    if sa == 0 or sb == 0:
        raise UndefinedCorrelationError("constant column has no rank order")
    return float(np.corrcoef(ra, rb)[0, 1])


def _column_costs(truth, est, loss):
    K = truth.shape[1]
    costs = np.empty((K, K))
    for j in range(K):       # truth column
        for i in range(K):   # estimate column
            if loss == "l1":
                costs[j, i] = np.abs(truth[:, j] - est[:, i]).sum()
            elif loss == "l2":
                costs[j, i] = ((truth[:, j] - est[:, i]) ** 2).sum()
            else:
                costs[j, i] = -_spearman(est[:, i], truth[:, j])
    return costs


def _aggregate(per_column, loss):
    if loss == "l2":
        return float(np.sqrt(per_column.sum()))
    return float(per_column.sum())


def perm_match(truth, est, loss="l1"):
    """Best bijection of estimate columns onto truth columns."""
    truth = np.asarray(truth, dtype=float)
    est = np.asarray(est, dtype=float)
    if truth.shape != est.shape:
        raise DimensionError(f"shape mismatch {truth.shape} vs {est.shape}")
    if loss not in LOSSES:
        raise DimensionError(f"unknown loss {loss!r}")
    K = truth.shape[1]
    costs = _column_costs(truth, est, loss)

    if K <= _EXHAUSTIVE_LIMIT:
        best, best_total = None, np.inf
        for perm in permutations(range(K)):
            total = sum(costs[j, perm[j]] for j in range(K))
            if total < best_total:
                best, best_total = perm, total
        perm = np.array(best, dtype=np.int64)
    else:
        rows, cols = linear_sum_assignment(costs)
        perm = np.empty(K, dtype=np.int64)
        perm[rows] = cols

    per_column = costs[np.arange(K), perm]
    if loss == "l2":
        per_column = np.sqrt(per_column)
        agg = float(np.sqrt((per_column ** 2).sum()))
    else:
        agg = float(per_column.sum())
    return MatchResult(permutation=perm, loss=agg, per_column_loss=per_column,
                       loss_kind=loss)


def align_columns(est, match):
    """Reorder estimate columns so column j matches truth column j."""
    return np.asarray(est)[:, match.permutation]


def rel_error(truth, est, norm="l1"):
    """Entrywise relative error after the best column permutation."""
    if norm not in ("l1", "l2"):
        raise DimensionError(f"unknown norm {norm!r}")
    truth = np.asarray(truth, dtype=float)
    est = np.asarray(est, dtype=float)
    match = perm_match(truth, est, loss=norm)
    aligned = align_columns(est, match)
    if norm == "l1":
        return float(np.abs(truth - aligned).sum() / np.abs(truth).sum())
    return float(np.linalg.norm(truth - aligned) / np.linalg.norm(truth))


def rc_avg(truth, est):
    """Permutation-maximized mean per-column Spearman rank correlation.

    Ties receive mean ranks.  Raises on constant columns, whose rank
    correlation is undefined.
    """
    truth = np.asarray(truth, dtype=float)
    est = np.asarray(est, dtype=float)
    match = perm_match(truth, est, loss="neg_spearman")
    return float(-match.loss / truth.shape[1])


def l1_topic_error(T, T_hat):
    """Mean-per-topic l1 distance between word-topic matrices, after the
    best topic permutation."""
    T = np.asarray(T, dtype=float)
    T_hat = np.asarray(T_hat, dtype=float)
    match = perm_match(T, T_hat, loss="l1")
    return float(match.loss / T.shape[1])

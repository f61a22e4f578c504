"""Hard-margin linear one-class SVM via its dual.

The primal maximizes the margin b of a hyperplane w'y >= b separating all
unit rows from the origin; the dual finds the minimum-norm point of the
convex hull of the rows.  The dual is solved with away-step Frank-Wolfe on
the probability simplex, periodically corrected by an exact minimum-norm
solve over the current support (the classic minor cycle), so the returned
weights are accurate to solver precision rather than just to the
duality-gap tolerance.

The objective depends on the input only through its gram matrix, so wide
inputs are first reduced to canonical coordinates of their numerical rank;
the returned hyperplane is always expressed in the original coordinates.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConeConditionError,
    ConvergenceError,
    DataError,
    DimensionError,
    RankError,
)

DEFAULT_TOL = 1e-12
_MARGIN_TOL = 1e-8
# corrective solves cost O(support * rank^2); skip beyond this budget
_CORRECTIVE_FLOP_CAP = 5e7


@dataclass(frozen=True)
class Hyperplane:
    """Supporting hyperplane found by the one-class SVM.

    ``normal`` is the unit normal, ``margin`` its distance from the origin,
    and ``dual_coef`` the simplex weights whose combination of input rows is
    the minimum-norm point (normal * margin).
    """

    normal: np.ndarray
    margin: float
    dual_coef: np.ndarray


def _objective(Y, beta):
    x = Y.T @ beta
    return x, float(x @ x)


def _reduce_columns(Y):
    """Isometric reduction of wide inputs to their numerical rank.

    The dual objective is a function of Y Y' only, so replacing Y by the
    scaled left singular vectors changes nothing beyond float noise while
    shrinking every per-iteration cost.
    """
    if Y.shape[1] <= 32:
        return Y
    left, sv, _ = np.linalg.svd(Y, full_matrices=False)
    top = sv.max(initial=0.0)
    r = max(1, int((sv > 1e-13 * top).sum()))
    return left[:, :r] * sv[:r]


def _affine_solve(Y_sub):
    """Minimum-norm point of the affine hull of the given rows.

    Projects the origin onto the affine hull in point space (an SVD of the
    centered rows, O(s r^2)), then recovers hull weights by a consistent
    least-squares solve with the sum-to-one constraint appended.  Returns
    weights summing to one, or None when the recovery is inconsistent.
    """
    s = Y_sub.shape[0]
    center = Y_sub.mean(axis=0)
    spread = Y_sub - center
    _, sv, vt = np.linalg.svd(spread, full_matrices=False)
    top = sv.max(initial=0.0)
    directions = vt[sv > 1e-12 * max(top, 1.0)]
    point = center - (center @ directions.T) @ directions
    system = np.vstack([Y_sub.T, np.ones((1, s))])
    rhs = np.append(point, 1.0)
    u, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    if not np.all(np.isfinite(u)):
        return None
    if np.max(np.abs(Y_sub.T @ u - point)) > 1e-9 or abs(u.sum() - 1.0) > 1e-9:
        return None
    return u


def _dedup_support(Y, support, grad):
    """Collapse near-identical support atoms onto single representatives.

    Nearly coincident atoms make the affine systems unresolvably
    ill-conditioned, and an even weight split over a pair whose members
    differ at the 1e-9 level leaves an irreducible first-order gap.  Keep,
    per group, the atom with the smallest gradient (ties: lowest index).
    Only worth the pairwise scan on small supports.
    """
    if support.size > 64:
        return support
    order = np.lexsort((support, grad[support]))
    chosen = []
    for idx in support[order]:
        if all(np.linalg.norm(Y[idx] - Y[c]) > 1e-7 for c in chosen):
            chosen.append(int(idx))
    return np.array(sorted(chosen), dtype=np.int64)


def _corrective_step(Y, beta, grad):
    """Minimum-norm point over the convex hull of the current support.

    Classic minor cycle: solve the affine minimum on the (deduplicated)
    support; while the solution leaves the simplex, move toward it until
    the first coordinate hits zero, drop that atom, and re-solve.  Returns
    an improved feasible point, or None when the solves are inconsistent.
    """
    support = _dedup_support(Y, np.flatnonzero(beta > 0), grad)
    local = np.full(support.size, 1.0 / support.size)
    for _ in range(support.size + 2):
        u = _affine_solve(Y[support])
        if u is None:
            return None
        if u.min() >= -1e-14:
            out = np.zeros(beta.size)
            out[support] = np.clip(u, 0.0, None)
            out /= out.sum()
            return out
        shrink = u < local
        with np.errstate(divide="ignore", invalid="ignore"):
            steps = local[shrink] / (local[shrink] - u[shrink])
        t = min(1.0, float(np.min(steps)))
        local = np.clip(local + t * (u - local), 0.0, None)
        keep = local > 1e-16
        if keep.all():            # no atom left the simplex: numerical stall
            return None
        support = support[keep]
        local = local[keep]
        local /= local.sum()
    return None


def solve_dual(Y, tol=DEFAULT_TOL):
    """Minimum-norm point in the convex hull of the rows of Y.

    Y must have unit l2 rows.  Returns the supporting hyperplane; the dual
    weights beta satisfy beta >= 0, sum(beta) = 1, and minimize
    0.5 * ||Y' beta||^2 with relative duality gap at most ``tol``.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2 or Y.shape[0] == 0:
        raise DimensionError("input must be a non-empty matrix of rows")
    if not np.all(np.isfinite(Y)):
        raise DataError("input rows contain non-finite entries")

    n = Y.shape[0]
    W = _reduce_columns(Y)
    rank = W.shape[1]
    beta = np.full(n, 1.0 / n)
    x, sq = _objective(W, beta)
    max_iter = 100 * n
    converged = False
    corrective_ok = n * rank * rank <= _CORRECTIVE_FLOP_CAP

    for it in range(max_iter):
        grad = W @ x
        fw = int(np.argmin(grad))          # ties: argmin picks the lowest index
        gap = sq - grad[fw]
        scale = max(sq, np.finfo(float).tiny)
        if gap <= tol * scale:
            converged = True
            break

        # exact minimum-norm solve over the current support; accept on a
        # strict objective improvement, or - near the optimum, where gains
        # fall below float resolution - on a clear gap improvement;
        # otherwise fall through to a Frank-Wolfe step, which brings the
        # violating atom into the support
        if corrective_ok and (it == 0 or it % 16 == 0 or gap <= 1e-3 * scale):
            cand = _corrective_step(W, beta, grad)
            if cand is not None:
                cx, csq = _objective(W, cand)
                if csq < sq * (1.0 - 1e-15):
                    beta, x, sq = cand, cx, csq
                    continue
                if csq <= sq * (1.0 + 1e-15):
                    cgap = csq - (W @ cx).min()
                    if cgap < 0.5 * gap:
                        beta, x, sq = cand, cx, csq
                        continue

        active = np.flatnonzero(beta > 0)
        away_local = active[int(np.argmax(grad[active]))]
        gap_away = grad[away_local] - sq

        if gap >= gap_away or active.size == 1:
            direction = W[fw] - x
            gamma_max = 1.0
            move_idx, away = fw, False
        else:
            direction = x - W[away_local]
            b_v = beta[away_local]
            gamma_max = b_v / (1.0 - b_v) if b_v < 1.0 else np.inf
            move_idx, away = away_local, True

        denom = float(direction @ direction)
        if denom <= 0:
            break
        gamma = min(max(-(x @ direction) / denom, 0.0), gamma_max)
        if gamma <= 0:
            break

        if away:
            beta *= 1.0 + gamma
            beta[move_idx] -= gamma
            if gamma >= gamma_max:      # drop step: the away atom leaves
                beta[move_idx] = 0.0
        else:
            beta *= 1.0 - gamma
            beta[move_idx] += gamma
        beta = np.clip(beta, 0.0, None)
        beta /= beta.sum()
        x, sq = _objective(W, beta)

    if not converged:
        grad = W @ x
        gap = sq - grad.min()
        if gap > tol * max(sq, np.finfo(float).tiny) * (1.0 + 1e-6):
            raise ConvergenceError(
                f"dual solver stalled at relative gap {gap / max(sq, 1e-300):.3e} "
                f"after {max_iter} iterations",
                residual=float(gap),
            )

    x = Y.T @ beta              # report in the original coordinates
    margin = float(np.linalg.norm(x))
    if margin < 1e-12:
        raise DataError("rows surround the origin; no supporting hyperplane exists")
    return Hyperplane(normal=x / margin, margin=margin, dual_coef=beta)


def closed_form_hyperplane(Y_P):
    """Population hyperplane through full-rank unit corner rows.

    With gram g = Y_P Y_P', the margin is (1' g^{-1} 1)^{-1/2}, the dual
    weights are g^{-1} 1 normalized to sum one, and the normal is their
    combination of corner rows scaled to unit length.  Requires every
    coordinate of g^{-1} 1 to be positive.
    """
    Y_P = np.asarray(Y_P, dtype=float)
    if Y_P.ndim != 2 or Y_P.shape[0] == 0:
        raise DimensionError("corner matrix must be non-empty")
    gram = Y_P @ Y_P.T
    try:
        u = np.linalg.solve(gram, np.ones(Y_P.shape[0]))
    except np.linalg.LinAlgError as exc:
        raise RankError(f"corner gram is singular: {exc}") from exc
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > 1e14:
        raise RankError(f"corner gram condition number {cond:.3e}")
    bad = np.flatnonzero(u <= 0)
    if bad.size:
        raise ConeConditionError(bad.tolist())
    total = float(u.sum())
    margin = total ** -0.5
    beta = u / total
    x = Y_P.T @ beta
    return Hyperplane(normal=x / np.linalg.norm(x), margin=margin, dual_coef=beta)


def support_set(h, Y, slack=0.0):
    """Indices within ``slack`` of the supporting hyperplane.

    Uses a closed band (<=) with a small margin tolerance so support vectors
    sitting exactly on the hyperplane are always included; slack=inf returns
    every index.
    """
    Y = np.asarray(Y, dtype=float)
    scores = Y @ h.normal
    return np.flatnonzero(scores <= h.margin + slack + _MARGIN_TOL)

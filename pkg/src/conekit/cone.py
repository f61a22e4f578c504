"""Corner finding on an empirical cone.

Pipeline: normalize rows to the unit sphere, find the supporting hyperplane
with the one-class SVM, collect the band of points within delta of the
hyperplane, cluster the band into K groups, take one representative per
group as a corner, and regress every row on the corner rows to get the
non-negative combination weights.

Also houses the cone diagnostics: the corner-gram condition vector, its
minimum eta, the gram spectrum, the hyperplane sensitivity factor zeta, and
the scale/barycentric decomposition of in-cone rows.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.cluster import KMeans

from .errors import (
    ClusterDegeneracyError,
    DimensionError,
    InsufficientBandError,
    NoConeStructureError,
    OutOfConeError,
    RankError,
)
from .ocsvm import Hyperplane, closed_form_hyperplane, solve_dual
from .spectral import row_normalize

_BAND_TOL = 1e-12
_GRAM_COND_LIMIT = 1e12

# adaptive band search: delta = margin * 2**(j - 20) for j = 0..20, after
# trying delta = 0; expressed as multipliers of the fitted margin
DEFAULT_DELTA_SCHEDULE = (0.0,) + tuple(2.0 ** (j - 20) for j in range(21))


@dataclass(frozen=True)
class ConeSolution:
    """Output of the corner-finding pipeline.

    ``weights`` holds the per-row non-negative combination coefficients
    (noisy inputs may produce slightly negative entries; model adapters
    clip), ``corners`` the chosen representative row indices, one per
    cluster, and ``band`` every row index within ``delta_used`` of the
    hyperplane.
    """

    weights: np.ndarray
    corners: np.ndarray
    hyperplane: Hyperplane
    delta_used: float
    band: np.ndarray
    cluster_labels: np.ndarray


@dataclass(frozen=True)
class ConeDiagnostics:
    """Conditioning and stability quantities for a set of corner rows."""

    condition_vector: np.ndarray   # inverse-gram row sums; positive iff cone condition holds
    eta: float                     # its minimum
    lambda_min: float              # smallest eigenvalue of the corner gram
    kappa: float                   # gram condition number
    zeta: float                    # hyperplane sensitivity 4 / (eta * b^2 * sqrt(lambda_min))
    margin: float
    scale_factors: np.ndarray      # per-row r >= 1
    barycentric: np.ndarray        # per-row convex weights over corners


def regress_weights(Z_hat, Y_C):
    """Least-squares coefficients of each row of Z_hat on the corner rows.

    Solves via the corner gram; refuses grams with condition number above
    1e12 since the coefficients would be meaningless.
    """
    Z_hat = np.asarray(Z_hat, dtype=float)
    Y_C = np.asarray(Y_C, dtype=float)
    if Z_hat.ndim != 2 or Y_C.ndim != 2 or Z_hat.shape[1] != Y_C.shape[1]:
        raise DimensionError("row dimensions of data and corners must agree")
    gram = Y_C @ Y_C.T
    eigs = np.linalg.eigvalsh(gram)
    if eigs[0] <= 0 or eigs[-1] / eigs[0] > _GRAM_COND_LIMIT:
        raise RankError(
            f"corner gram is rank deficient (condition number "
            f"{np.inf if eigs[0] <= 0 else eigs[-1] / eigs[0]:.3e})"
        )
    return np.linalg.solve(gram, Y_C @ Z_hat.T).T


def cluster_band(Y_band, K, rng_seed=0):
    """K-means over band rows; returns (labels, representative indices).

    k-means++ seeding from ``rng_seed``, 100 restarts capped at 300
    iterations, best inertia kept.  The representative of each cluster is
    its medoid (the member minimizing summed in-cluster distance), ties
    broken by lowest index.
    """
    Y_band = np.asarray(Y_band, dtype=float)
    s = Y_band.shape[0]
    if s < K:
        raise InsufficientBandError(f"{s} band points for {K} clusters")
    km = KMeans(n_clusters=K, init="k-means++", n_init=100, max_iter=300,
                random_state=int(rng_seed) & 0xFFFFFFFF)
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=".*distinct clusters.*")
        labels = km.fit_predict(Y_band)
    sizes = np.bincount(labels, minlength=K)
    if np.any(sizes == 0):
        raise ClusterDegeneracyError(
            f"empty cluster(s) {np.flatnonzero(sizes == 0).tolist()}"
        )
    reps = np.empty(K, dtype=np.int64)
    for k in range(K):
        members = np.flatnonzero(labels == k)
        pts = Y_band[members]
        totals = np.empty(members.size)
        for start in range(0, members.size, 512):   # bounded-memory pairwise sums
            block = pts[start:start + 512]
            d = np.linalg.norm(block[:, None, :] - pts[None, :, :], axis=2)
            totals[start:start + 512] = d.sum(axis=1)
        reps[k] = members[int(np.argmin(totals))]
    return labels, reps


@dataclass(frozen=True)
class _PreparedCone:
    Y: np.ndarray
    norms: np.ndarray
    Z: np.ndarray
    hyperplane: Hyperplane
    scores: np.ndarray


def _prepare(Z_hat):
    normalized = row_normalize(Z_hat)
    h = solve_dual(normalized.Y)
    scores = normalized.Y @ h.normal
    return _PreparedCone(Y=normalized.Y, norms=normalized.norms,
                         Z=np.asarray(Z_hat, dtype=float), hyperplane=h,
                         scores=scores)


def _complete(prep, K, delta, rng_seed):
    band = np.flatnonzero(prep.scores <= prep.hyperplane.margin + delta + _BAND_TOL)
    if band.size < K:
        raise InsufficientBandError(
            f"band holds {band.size} points, need at least {K}; raise delta"
        )
    labels, reps = cluster_band(prep.Y[band], K, rng_seed=rng_seed)
    corners = band[reps]
    weights = regress_weights(prep.Z, prep.Y[corners])
    return ConeSolution(
        weights=weights,
        corners=corners,
        hyperplane=prep.hyperplane,
        delta_used=float(delta),
        band=band,
        cluster_labels=labels,
    )


def svm_cone(Z_hat, K, delta, rng_seed=0):
    """Run the full corner-finding pipeline at a fixed band width delta."""
    if K < 1:
        raise DimensionError("K must be at least 1")
    prep = _prepare(Z_hat)
    return _complete(prep, K, float(delta), rng_seed)


def _clusters_separated(Y_band, labels, K):
    """True when min inter-centroid distance exceeds max intra radius."""
    if K == 1:
        return True
    centroids = np.stack([Y_band[labels == k].mean(axis=0) for k in range(K)])
    radius = 0.0
    for k in range(K):
        pts = Y_band[labels == k]
        radius = max(radius, float(np.linalg.norm(pts - centroids[k], axis=1).max()))
    sep = np.inf
    for a in range(K):
        for b in range(a + 1, K):
            sep = min(sep, float(np.linalg.norm(centroids[a] - centroids[b])))
    return sep > radius


def auto_delta(Z_hat, K, schedule=None, rng_seed=0):
    """Grow the band until K distinct clusters appear.

    ``schedule`` lists band widths as multipliers of the fitted margin
    (default: 0, then 2**-20 .. 2**0).  A width is accepted when the band
    holds at least K points, clustering yields K non-empty clusters, and
    the clusters are pairwise separated (min inter-centroid distance above
    max intra-cluster radius).
    """
    if K < 1:
        raise DimensionError("K must be at least 1")
    if schedule is None:
        schedule = DEFAULT_DELTA_SCHEDULE
    prep = _prepare(Z_hat)
    last_error = None
    for mult in schedule:
        delta = float(mult) * prep.hyperplane.margin
        try:
            sol = _complete(prep, K, delta, rng_seed)
        except (InsufficientBandError, ClusterDegeneracyError, RankError) as exc:
            last_error = exc
            continue
        if _clusters_separated(prep.Y[sol.band], sol.cluster_labels, K):
            return sol
        last_error = None
    raise NoConeStructureError(
        "band schedule exhausted without K separated clusters"
        + (f" (last failure: {last_error})" if last_error else "")
    )


def check_condition(Y_P, Z=None):
    """Cone diagnostics for unit corner rows Y_P.

    The condition vector is the inverse corner gram applied to the all-ones
    vector; its minimum eta is positive exactly when the one-class SVM is
    guaranteed to touch every corner.  When Z is given, its rows are
    decomposed against the corners to populate the scale factors and
    barycentric weights; otherwise the corners themselves are used.
    """
    Y_P = np.asarray(Y_P, dtype=float)
    gram = Y_P @ Y_P.T
    K = gram.shape[0]
    eigs = np.linalg.eigvalsh(gram)
    if eigs[0] <= 0:
        raise RankError("corner gram is singular")
    try:
        cond_vec = np.linalg.solve(gram, np.ones(K))
    except np.linalg.LinAlgError as exc:
        raise RankError(f"corner gram is singular: {exc}") from exc
    eta = float(cond_vec.min())
    lam = float(eigs[0])
    kappa = float(eigs[-1] / eigs[0])
    total = float(cond_vec.sum())
    margin = total ** -0.5 if total > 0 else float("nan")
    zeta = 4.0 / (eta * margin ** 2 * np.sqrt(lam)) if eta > 0 and total > 0 else float("inf")
    r, phi = decompose_rows(Y_P if Z is None else Z, Y_P)
    return ConeDiagnostics(
        condition_vector=cond_vec,
        eta=eta,
        lambda_min=lam,
        kappa=kappa,
        zeta=zeta,
        margin=margin,
        scale_factors=r,
        barycentric=phi,
    )


def decompose_rows(Z, Y_P):
    """Scale factors and barycentric weights of rows against unit corners.

    Each normalized in-cone row equals r * (phi' Y_P) with phi on the
    simplex and r >= 1; a row whose regression weights sum to a
    non-positive value is outside the cone.
    """
    Z = np.asarray(Z, dtype=float)
    weights = regress_weights(Z, Y_P)
    totals = weights.sum(axis=1)
    bad = np.flatnonzero(totals <= 0)
    if bad.size:
        raise OutOfConeError(
            f"rows {bad.tolist()[:20]} have non-positive weight sums"
        )
    combo = weights @ Y_P
    r = totals / np.linalg.norm(combo, axis=1)
    phi = weights / totals[:, None]
    return r, phi

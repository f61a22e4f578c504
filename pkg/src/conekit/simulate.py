"""Generative samplers for overlapping-community networks and topic corpora.

Network models share the population form
    P = density * diag(degrees) memberships block memberships' diag(degrees)
with zero diagonal; edges are independent Bernoulli draws on unordered
pairs.  Topic corpora draw per-document topic mixtures from a sparse
Dirichlet and word counts from one multinomial per document, so column sums
equal the document length exactly while each cell's marginal law is the
binomial one.

Every draw comes from a counter-based stream keyed by (seed, purpose,
entity), making outputs bit-identical across runs and thread counts.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ScaleError, TooFewWordsError
from .models import NetworkParams, TopicParams
from .rng import (
    TAG_DEGREE,
    TAG_DOC_COUNTS,
    TAG_DOC_MIX,
    TAG_EDGE_ROW,
    TAG_MEMBERSHIP,
    TAG_OVERLAP,
    TAG_TOPIC_WORDS,
    keyed_rng,
)
from .spectral import SparseCounts, SparseSymAdjacency


@dataclass(frozen=True)
class SimConfig:
    """Settings for one synthetic dataset.

    ``gamma_spec`` is one of ("values", (v_1 .. v_K)) assigning listed
    degree values to nodes predominantly in each community, ("beta", a, b)
    for iid Beta draws, or ("const", c).  ``b_spec`` is (diagonal,
    off-diagonal) or a full K x K matrix.  ``plant_pure`` pins the first K
    nodes to one community each so every community has an exact exemplar.
    """

    k: int
    seed: int
    n: int | None = None
    alpha: tuple = ()
    b_spec: object = (1.0, 0.1)
    rho: float = 1.0
    gamma_spec: tuple = ("const", 1.0)
    plant_pure: bool = True
    overlap_fraction: float = 0.0
    # topic-model settings
    n_words: int | None = None
    n_docs: int | None = None
    tokens_per_doc: int | None = None
    doc_topic_alpha: float = 0.01
    anchors_per_topic: int = 1
    anchor_mass: float = 0.05
    topic_word_alpha: float = 1.0

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("k", "must be at least 1")
        if not (0.0 <= self.rho <= 1.0):
            raise ConfigError("rho", "must lie in [0, 1]")
        if self.alpha and any(a <= 0 for a in self.alpha):
            raise ConfigError("alpha", "entries must be positive")
        if not (0.0 <= self.overlap_fraction <= 1.0):
            raise ConfigError("overlap_fraction", "must lie in [0, 1]")

    def alpha_vector(self):
        if not self.alpha:
            return np.full(self.k, 1.0 / self.k)
        if len(self.alpha) == 1:
            return np.full(self.k, float(self.alpha[0]))
        if len(self.alpha) != self.k:
            raise ConfigError("alpha", f"needs 1 or {self.k} entries")
        return np.asarray(self.alpha, dtype=float)

    def block_matrix(self):
        if isinstance(self.b_spec, tuple) and len(self.b_spec) == 2 \
                and np.isscalar(self.b_spec[0]):
            diag, off = (float(x) for x in self.b_spec)
            B = np.full((self.k, self.k), off)
            np.fill_diagonal(B, diag)
        else:
            B = np.asarray(self.b_spec, dtype=float)
            if B.shape != (self.k, self.k):
                raise ConfigError("b_spec", f"matrix must be {self.k}x{self.k}")
            if np.abs(B - B.T).max() > 1e-12:
                raise ConfigError("b_spec", "matrix must be symmetric")
        if B.min() < 0:
            raise ConfigError("b_spec", "entries must be non-negative")
        return B


class Population:
    """Row-on-demand access to the population edge-probability matrix."""

    def __init__(self, density, degrees, memberships, block):
        self.density = float(density)
        self.degrees = np.asarray(degrees, dtype=float)
        self.memberships = np.asarray(memberships, dtype=float)
        self.block = np.asarray(block, dtype=float)
        self._gb = self.memberships @ self.block     # n x K, reused per row

    @property
    def n(self):
        return self.degrees.size

    def row(self, i):
        p = self.density * self.degrees[i] * self.degrees \
            * (self._gb[i] @ self.memberships.T)
        p[i] = 0.0
        return p

    def dense(self):
        """Edge-probability matrix (diagonal zeroed; self-loops never occur)."""
        P = self.dense_lowrank()
        np.fill_diagonal(P, 0.0)
        return P

    def dense_lowrank(self):
        """The exact rank-K population form, diagonal intact.

        This is the matrix whose eigenvectors form the ideal cone; feed it
        to the estimators for noiseless recovery.
        """
        P = self.density * (self._gb @ self.memberships.T) \
            * np.outer(self.degrees, self.degrees)
        return P

    def validate_probabilities(self):
        for i in range(self.n):
            p = self.row(i)
            j = int(np.argmax(p))
            if p[j] > 1.0:
                raise ScaleError(
                    f"edge probability P[{i},{j}] = {p[j]:.6g} exceeds 1; "
                    f"decrease rho or the degree parameters"
                )

    def expected_edges(self):
        total = 0.0
        for i in range(self.n):
            total += self.row(i)[i + 1:].sum()
        return total

    def edge_count_std(self):
        var = 0.0
        for i in range(self.n):
            p = self.row(i)[i + 1:]
            var += (p * (1.0 - p)).sum()
        return float(np.sqrt(var))

    def mean_degree(self):
        return 2.0 * self.expected_edges() / self.n


def _sample_adjacency(pop, seed):
    rows, cols = [], []
    for i in range(pop.n - 1):
        p = pop.row(i)[i + 1:]
        rng = keyed_rng(seed, TAG_EDGE_ROW, i)
        hits = np.flatnonzero(rng.random(p.size) < p)
        if hits.size:
            rows.append(np.full(hits.size, i, dtype=np.int64))
            cols.append(hits + i + 1)
    if rows:
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
    else:
        rows = np.empty(0, dtype=np.int64)
        cols = np.empty(0, dtype=np.int64)
    return SparseSymAdjacency(pop.n, rows, cols, np.ones(rows.size))


def _dirichlet_rows(cfg, n):
    from .rng import dirichlet

    alpha = cfg.alpha_vector()
    theta = np.empty((n, cfg.k))
    start = 0
    if cfg.plant_pure:
        theta[: cfg.k] = np.eye(cfg.k)
        start = cfg.k
    for i in range(start, n):
        theta[i] = dirichlet(keyed_rng(cfg.seed, TAG_MEMBERSHIP, i), alpha)
    return theta


def _degree_values(cfg, theta, n):
    kind = cfg.gamma_spec[0]
    if kind == "values":
        values = np.asarray(cfg.gamma_spec[1], dtype=float)
        if values.size != cfg.k:
            raise ConfigError("gamma_spec", f"needs {cfg.k} values")
        gamma = np.ones(n)
        lead = np.argmax(theta, axis=1)
        dominant = theta[np.arange(n), lead] > 0.5
        gamma[dominant] = values[lead[dominant]]
        return gamma
    if kind == "beta":
        a, b = float(cfg.gamma_spec[1]), float(cfg.gamma_spec[2])
        return np.array([
            keyed_rng(cfg.seed, TAG_DEGREE, i).beta(a, b) for i in range(n)
        ])
    if kind == "const":
        return np.full(n, float(cfg.gamma_spec[1]))
    raise ConfigError("gamma_spec", f"unknown kind {kind!r}")


def _finish_network(cfg, theta, gamma_raw, p):
    """Normalize degrees to sum n, fold the rescale into the density, build
    and validate the population, and sample the adjacency."""
    n = theta.shape[0]
    B = cfg.block_matrix()
    scale = n / gamma_raw.sum()
    gamma = gamma_raw * scale
    density = cfg.rho / scale ** 2
    pop = Population(density, gamma, theta, B)
    pop.validate_probabilities()
    adj = _sample_adjacency(pop, cfg.seed)
    truth = NetworkParams(
        memberships=theta, degrees=gamma, block_matrix=B,
        density=density, norm_order=p,
    )
    return adj, truth, pop


def gen_dcmmsb(cfg):
    """Dirichlet memberships with l1 rows and rule-based degree parameters."""
    if cfg.n is None or cfg.n < cfg.k:
        raise ConfigError("n", "must be at least k")
    theta = _dirichlet_rows(cfg, cfg.n)
    gamma_raw = _degree_values(cfg, theta, cfg.n)
    return _finish_network(cfg, theta, gamma_raw, p=1)


def gen_occam(cfg):
    """Dirichlet memberships renormalized to unit l2 rows; Beta degrees."""
    if cfg.n is None or cfg.n < cfg.k:
        raise ConfigError("n", "must be at least k")
    theta = _dirichlet_rows(cfg, cfg.n)
    theta = theta / np.linalg.norm(theta, axis=1, keepdims=True)
    gamma_raw = _degree_values(cfg, theta, cfg.n)
    return _finish_network(cfg, theta, gamma_raw, p=2)


def gen_sbmo(cfg, overlap_fraction=None):
    """Binary multi-membership blockmodel, converted to the shared form.

    Every node gets one community uniformly at random; a fraction gets a
    second distinct one.  The returned truth carries the converted degree
    and membership parameters (degrees proportional to the number of
    memberships, normalized to sum n) plus the raw binary assignments, so
    the population built from the conversion equals density * Z B Z'.
    """
    if cfg.n is None or cfg.n < cfg.k:
        raise ConfigError("n", "must be at least k")
    if overlap_fraction is None:
        overlap_fraction = cfg.overlap_fraction
    n, K = cfg.n, cfg.k
    Z = np.zeros((n, K), dtype=bool)
    for i in range(n):
        rng = keyed_rng(cfg.seed, TAG_OVERLAP, i)
        if cfg.plant_pure and i < K:
            Z[i, i] = True
            continue
        first = int(rng.integers(K))
        Z[i, first] = True
        if overlap_fraction > 0 and rng.random() < overlap_fraction:
            second = int(rng.integers(K - 1))
            if second >= first:
                second += 1
            Z[i, second] = True
    counts = Z.sum(axis=1).astype(float)
    theta = Z / counts[:, None]
    adj, truth, pop = _finish_network(cfg, theta, counts, p=1)
    truth = NetworkParams(
        memberships=truth.memberships, degrees=truth.degrees,
        block_matrix=truth.block_matrix, density=truth.density,
        norm_order=1, binary_memberships=Z,
    )
    return adj, truth, pop


def planted_word_topic(cfg):
    """Column-stochastic word-topic matrix with planted anchor words.

    The first anchors_per_topic * k words are anchors, exclusive to one
    topic and holding anchor_mass each; the remaining mass is spread over
    non-anchor words by a symmetric Dirichlet draw per topic.
    """
    V, K = cfg.n_words, cfg.k
    if V is None or V < 2 * K:
        raise TooFewWordsError(f"vocabulary {V} too small for {K} topics")
    apt = cfg.anchors_per_topic
    n_anchor = apt * K
    if n_anchor * cfg.anchor_mass >= 1.0:
        raise ConfigError("anchor_mass", "total anchor mass must stay below 1")
    if V <= n_anchor:
        raise TooFewWordsError(f"vocabulary {V} has no non-anchor words")
    from .rng import dirichlet

    T = np.zeros((V, K))
    rest = 1.0 - apt * cfg.anchor_mass
    for k in range(K):
        T[k * apt:(k + 1) * apt, k] = cfg.anchor_mass
        body = dirichlet(
            keyed_rng(cfg.seed, TAG_TOPIC_WORDS, k),
            np.full(V - n_anchor, cfg.topic_word_alpha),
        )
        T[n_anchor:, k] = rest * body
    return T


def gen_topics(cfg):
    """Synthetic corpus: planted topics, sparse Dirichlet document mixtures,
    one multinomial draw of tokens per document."""
    for name in ("n_words", "n_docs", "tokens_per_doc"):
        if getattr(cfg, name) is None:
            raise ConfigError(name, "required for topic corpora")
    from .rng import dirichlet

    V, D, N, K = cfg.n_words, cfg.n_docs, cfg.tokens_per_doc, cfg.k
    T = planted_word_topic(cfg)
    H = np.empty((K, D))
    words, docs, counts = [], [], []
    alpha = np.full(K, cfg.doc_topic_alpha)
    for d in range(D):
        H[:, d] = dirichlet(keyed_rng(cfg.seed, TAG_DOC_MIX, d), alpha)
        probs = T @ H[:, d]
        draw = keyed_rng(cfg.seed, TAG_DOC_COUNTS, d).multinomial(N, probs)
        hits = np.flatnonzero(draw)
        words.append(hits)
        docs.append(np.full(hits.size, d, dtype=np.int64))
        counts.append(draw[hits])
    A = SparseCounts(
        V, D,
        np.concatenate(words) if words else np.empty(0, dtype=np.int64),
        np.concatenate(docs) if docs else np.empty(0, dtype=np.int64),
        np.concatenate(counts) if counts else np.empty(0, dtype=np.int64),
    )
    truth = TopicParams(word_topic=T, topic_doc=H, tokens_per_doc=N)
    return A, truth

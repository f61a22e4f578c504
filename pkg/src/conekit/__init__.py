"""Overlapping-cluster parameter inference from empirical cones.

Rows of a suitable spectral embedding lie (up to noise) inside a cone whose
corner rays are the embeddings of pure entities; a one-class SVM finds the
corners, a regression recovers the combination weights, and model adapters
turn those weights into memberships, degree parameters, block matrices, and
word-topic distributions.
"""

__version__ = "0.1.0"

from .cone import (
    ConeDiagnostics,
    ConeSolution,
    auto_delta,
    check_condition,
    cluster_band,
    decompose_rows,
    regress_weights,
    svm_cone,
)
from .metrics import MatchResult, l1_topic_error, perm_match, rc_avg, rel_error
from .models import (
    NetworkParams,
    SplitCounts,
    TopicParams,
    binarize_memberships,
    fit_dcmmsb,
    fit_sbmo,
    fit_topics,
    fit_topics_population,
    remove_empty_words,
    remove_isolated_nodes,
    split_documents,
)
from .ocsvm import Hyperplane, closed_form_hyperplane, solve_dual, support_set
from .simulate import (
    Population,
    SimConfig,
    gen_dcmmsb,
    gen_occam,
    gen_sbmo,
    gen_topics,
    planted_word_topic,
)
from .spectral import (
    NormalizedRows,
    SparseCounts,
    SparseSymAdjacency,
    Spectrum,
    row_normalize,
    top_k_eigs,
    top_k_svd,
)

__all__ = [
    "ConeDiagnostics", "ConeSolution", "Hyperplane", "MatchResult",
    "NetworkParams", "NormalizedRows", "Population", "SimConfig",
    "SparseCounts", "SparseSymAdjacency", "Spectrum", "SplitCounts",
    "TopicParams", "auto_delta", "binarize_memberships", "check_condition",
    "closed_form_hyperplane", "cluster_band", "decompose_rows", "fit_dcmmsb",
    "fit_sbmo", "fit_topics", "fit_topics_population", "gen_dcmmsb",
    "gen_occam", "gen_sbmo", "gen_topics", "l1_topic_error", "perm_match",
    "planted_word_topic", "rc_avg", "regress_weights", "rel_error",
    "remove_empty_words", "remove_isolated_nodes", "row_normalize",
    "solve_dual", "split_documents", "support_set", "svm_cone", "top_k_eigs",
    "top_k_svd",
]

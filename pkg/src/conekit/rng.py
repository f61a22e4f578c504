"""Counter-based random streams.

Every stochastic quantity in conekit is drawn from a Philox generator keyed
by (seed, purpose tag, entity index).  Streams are therefore independent of
evaluation order and thread count: sampling node 7's edges gives the same
bits whether it happens first, last, or in parallel.
"""

import numpy as np

_MASK64 = (1 << 64) - 1

# purpose tags; 16 bits reserved, entity index lives in the low 48 bits
TAG_MEMBERSHIP = 1
TAG_DEGREE = 2
TAG_EDGE_ROW = 3
TAG_TOPIC_WORDS = 4
TAG_DOC_MIX = 5
TAG_DOC_COUNTS = 6
TAG_DOC_SPLIT = 7
TAG_OVERLAP = 8
TAG_GENERIC = 15


def keyed_rng(seed, tag, index=0):
    """Generator for stream (seed, tag, index); identical args, identical bits."""
    if index < 0 or index >= (1 << 48):
        raise ValueError(f"stream index out of range: {index}")
    key = [int(seed) & _MASK64, ((int(tag) << 48) | int(index)) & _MASK64]
    return np.random.Generator(np.random.Philox(key=key))


def dirichlet(rng, alpha):
    """Dirichlet draw via normalized independent gamma variates.

    Very small concentration parameters can underflow every gamma draw to
    zero; that all-zero corner case falls back to a point mass on the first
    coordinate so callers always get a valid probability vector.
    """
    alpha = np.asarray(alpha, dtype=float)
    draws = rng.standard_gamma(alpha)
    total = draws.sum()
    if total <= 0.0:
        out = np.zeros_like(alpha)
        out[0] = 1.0
        return out
    return draws / total

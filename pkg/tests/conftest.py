"""Shared fixtures and independent oracles used across the suite."""

from itertools import combinations

import numpy as np
import pytest

from conekit import SimConfig


def unit_rows(raw):
    raw = np.atleast_2d(np.asarray(raw, dtype=float))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def positive_cone_rows(rng, n, m):
    """Random unit rows in the strictly positive orthant; the origin is
    never inside their hull, so the one-class SVM geometry is well posed."""
    return unit_rows(np.abs(rng.standard_normal((n, m))) + 1e-3)


def min_norm_oracle(Y, max_support=None):
    """Exhaustive active-set oracle for the minimum-norm point problem.

    For every candidate support, solve the equality-constrained least-norm
    problem through the gram system and keep the best feasible solution.
    By Caratheodory, the unique optimum of a generic instance is supported
    on at most m+1 affinely independent rows, so enumeration up to that
    size is exhaustive; pass max_support=None to sweep every subset anyway.
    """
    Y = np.asarray(Y, dtype=float)
    n, m = Y.shape
    cap = n if max_support is None else min(n, max_support)
    best_beta, best_val = None, np.inf
    for size in range(1, cap + 1):
        for sub in combinations(range(n), size):
            sub = list(sub)
            gram = Y[sub] @ Y[sub].T
            try:
                u = np.linalg.solve(gram, np.ones(size))
            except np.linalg.LinAlgError:
                continue
            total = u.sum()
            if total <= 0:
                continue
            cand = u / total
            if cand.min() < -1e-12:
                continue
            val = float(cand @ gram @ cand)
            if val < best_val - 1e-15:
                best_val = val
                best_beta = np.zeros(n)
                best_beta[sub] = np.clip(cand, 0.0, None)
                best_beta /= best_beta.sum()
    assert best_beta is not None, "oracle found no feasible support"
    return best_beta, float(np.sqrt(best_val))


def dcmmsb_config(seed, n=60, k=3, rho=0.8, alpha=None, gamma=None,
                  b=(1.0, 0.1)):
    return SimConfig(
        k=k, seed=seed, n=n,
        alpha=alpha if alpha is not None else (1.0 / k,) * k,
        b_spec=b, rho=rho,
        gamma_spec=gamma if gamma is not None else
        ("values", tuple(0.3 + 0.2 * (i % 4) for i in range(k))),
    )


def align_by_corners(corners, pure_indices):
    """Column permutation mapping estimate columns to planted communities,
    valid when every corner is one of the planted pure nodes."""
    lookup = {int(node): comm for comm, node in enumerate(pure_indices)}
    return np.array([lookup[int(c)] for c in corners], dtype=np.int64)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

"""Rank construction and correlation diagnostics for comparing selections.

Spearman is computed as the Pearson correlation of average-tie ranks. The
Pearson denominator is sqrt(sum(dx^2) * sum(dy^2)), which returns exactly
1.0 / -1.0 for identical / sign-flipped inputs: in round-to-nearest float64,
sqrt(fl(s * s)) == s, so the ratio cancels bit-for-bit.

Constant input is an error, not NaN: callers must face degenerate score
distributions (for instance, a learner that never forgets anything) rather
than silently propagating NaN into reports.
"""

from __future__ import annotations

import numpy as np


class DegenerateInputError(ValueError):
    """Raised when a correlation input has fewer than two distinct values."""


def _check_vector(v, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{what} must be 1-D, got ndim={v.ndim}")
    if not np.isfinite(v).all():
        raise ValueError(f"{what} contains non-finite values")
    return v


def scores_to_ranks(scores, descending: bool = True) -> np.ndarray:
    """Average-tie ranks in [1, n]; rank 1 = highest score when descending."""
    s = _check_vector(scores, "scores")
    key = -s if descending else s
    uniq, inverse = np.unique(key, return_inverse=True)
    counts = np.bincount(inverse)
    # Rank of a group = number of strictly better values + average position
    # within the group: (before + 1 + before + count) / 2.
    before = np.cumsum(counts) - counts
    group_rank = before + (counts + 1) / 2.0
    return group_rank[inverse]


def pearson(x, y) -> float:
    """Product-moment correlation; exact at the +1/-1 endpoints."""
    x = _check_vector(x, "x")
    y = _check_vector(y, "y")
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"length mismatch: {x.shape[0]} vs {y.shape[0]}")
    if x.shape[0] < 2:
        raise ValueError("need at least 2 observations")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0:
        raise DegenerateInputError("x is constant")
    if syy == 0.0:
        raise DegenerateInputError("y is constant")
    return float(dx @ dy) / np.sqrt(sxx * syy)


def spearman(a, b) -> float:
    """Pearson correlation of average-tie ranks of a and b."""
    a = _check_vector(a, "a")
    b = _check_vector(b, "b")
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    if a.shape[0] < 2:
        raise ValueError("need at least 2 observations")
    return pearson(scores_to_ranks(a), scores_to_ranks(b))

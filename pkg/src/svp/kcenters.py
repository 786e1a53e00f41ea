"""Greedy k-centers selection over a feature matrix.

Repeatedly adds the point farthest (Euclidean) from the current center set.
A per-example minimum-distance cache is refreshed with one pass over the pool
per added center, so total cost is O((|initial| + budget) * n * d) rather than
the quadratic-in-n cost of recomputing all pairwise distances each step.
Squared distances drive the argmax (monotone-equivalent); reported distances
are true Euclidean. Argmax ties resolve to the lowest index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class KCentersResult:
    """Selection order plus the final distance-to-nearest-center profile.

    order: indices added by the greedy loop, in addition order; disjoint
        from the initial set.
    min_dists: per-example Euclidean distance to the nearest point among
        initial + order, after the last addition.
    picked_dists: for each added point, its distance to the nearest center
        at the moment of addition (the value the greedy step maximized);
        nonincreasing.
    """

    order: np.ndarray
    min_dists: np.ndarray
    picked_dists: np.ndarray


def _check_features(features: np.ndarray) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"features must be 2-D, got ndim={x.ndim}")
    if x.shape[0] < 1 or x.shape[1] < 1:
        raise ValueError(f"features must be nonempty, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise ValueError("features contain non-finite values")
    return x


def _check_index_set(indices, n: int, what: str) -> np.ndarray:
    idx = np.asarray(indices, dtype=np.int64).reshape(-1)
    if idx.size == 0:
        raise ValueError(f"{what} must be nonempty")
    if (idx < 0).any() or (idx >= n).any():
        raise ValueError(f"{what} index out of range [0, {n})")
    if np.unique(idx).size != idx.size:
        raise ValueError(f"{what} holds duplicate indices")
    return idx


def _sq_dists_to(x: np.ndarray, center_row: np.ndarray) -> np.ndarray:
    diff = x - center_row
    return np.einsum("ij,ij->i", diff, diff)


def greedy_kcenters(features: np.ndarray, initial, budget: int) -> KCentersResult:
    """Add ``budget`` points, each the current farthest-from-set example."""
    x = _check_features(features)
    n = x.shape[0]
    init = _check_index_set(initial, n, "initial set")
    if budget < 0:
        raise ValueError(f"budget must be nonnegative, got {budget}")
    if budget > n - init.size:
        raise ValueError(f"budget {budget} exceeds pool of {n - init.size} candidates")

    min_sq = np.full(n, np.inf)
    for j in init:
        min_sq = np.minimum(min_sq, _sq_dists_to(x, x[j]))

    in_set = np.zeros(n, dtype=bool)
    in_set[init] = True
    order = np.empty(budget, dtype=np.int64)
    picked = np.empty(budget, dtype=np.float64)
    for t in range(budget):
        masked = np.where(in_set, -np.inf, min_sq)
        u = int(np.argmax(masked))  # first occurrence = lowest index on ties
        order[t] = u
        picked[t] = np.sqrt(min_sq[u])
        in_set[u] = True
        min_sq = np.minimum(min_sq, _sq_dists_to(x, x[u]))

    return KCentersResult(order=order, min_dists=np.sqrt(min_sq), picked_dists=picked)


def kcenter_radius(features: np.ndarray, centers) -> float:
    """Max over examples of distance to the nearest center."""
    x = _check_features(features)
    c = _check_index_set(centers, x.shape[0], "centers")
    min_sq = np.full(x.shape[0], np.inf)
    for j in c:
        min_sq = np.minimum(min_sq, _sq_dists_to(x, x[j]))
    return float(np.sqrt(min_sq.max()))


def kcenters_full_ranking(features: np.ndarray, initial) -> np.ndarray:
    """Rank all non-initial points by greedy addition order (earliest first)."""
    x = _check_features(features)
    init = _check_index_set(initial, x.shape[0], "initial set")
    return greedy_kcenters(x, init, x.shape[0] - init.size).order


def write_order_csv(result: KCentersResult, path: str) -> None:
    """Export the selection order as CSV ``rank,example_id,min_dist``.

    min_dist is the example's distance to the nearest center at the time it
    was added, i.e. the max-min value the greedy step maximized.
    """
    from .tensor_io import atomic_write_text

    lines = ["rank,example_id,min_dist"]
    for rank, (ex, dist) in enumerate(zip(result.order, result.picked_dists), start=1):
        lines.append(f"{rank},{int(ex)},{float(dist)!r}")
    atomic_write_text(path, "\n".join(lines) + "\n")

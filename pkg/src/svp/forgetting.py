"""Forgetting events from per-example correctness records.

An event is a correct-then-incorrect transition between consecutive
observations of the same example, with the pre-training accuracy taken as 0.
Examples that are never correct are flagged never_learned and sort above
every finite count. The total order is: never_learned first, then count
descending, then example index ascending.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor_io import check_train_log


@dataclass(frozen=True)
class ForgettingState:
    """Streaming per-example accumulator: last observed accuracy and count."""

    prev: bool = False
    count: int = 0


@dataclass(frozen=True)
class ForgettingScores:
    """Per-example forgetting summary, aligned with example indices."""

    never_learned: np.ndarray  # (n,) bool
    counts: np.ndarray  # (n,) int64

    def __post_init__(self):
        if self.never_learned.shape != self.counts.shape:
            raise ValueError("never_learned and counts must align")
        if (self.counts[self.never_learned] != 0).any():
            raise ValueError("a never-learned example cannot have events")


def streaming_update(state: ForgettingState, acc: bool) -> ForgettingState:
    """Fold one observation into the state; accuracy observed pre-update."""
    acc = bool(acc)
    return ForgettingState(prev=acc, count=state.count + (1 if state.prev and not acc else 0))


def finalize(state: ForgettingState) -> tuple[bool, int]:
    """(never_learned, count) for a fully folded row.

    A row containing any 1 that is later followed by a 0 must contain an
    adjacent 1->0 pair, so count == 0 with prev == 0 happens only for
    all-zero rows; the two-field state suffices.
    """
    return (state.count == 0 and not state.prev, state.count)


def process_log(log: np.ndarray) -> ForgettingScores:
    """Count 1->0 transitions per row; flag all-zero rows never_learned."""
    log = check_train_log(log)
    transitions = log[:, :-1] & ~log[:, 1:]
    counts = transitions.sum(axis=1).astype(np.int64)
    never = ~log.any(axis=1)
    return ForgettingScores(never_learned=never, counts=counts)


def forgetting_order(scores: ForgettingScores) -> np.ndarray:
    """All example indices sorted by the forgetting total order."""
    n = scores.counts.shape[0]
    keys = (np.arange(n), -scores.counts, ~scores.never_learned)
    return np.lexsort(keys).astype(np.int64)


def select_most_forgotten(scores: ForgettingScores, m: int) -> np.ndarray:
    """First m indices under the total order."""
    n = scores.counts.shape[0]
    if m < 0:
        raise ValueError(f"m must be nonnegative, got {m}")
    if m > n:
        raise ValueError(f"m={m} exceeds n={n}")
    return forgetting_order(scores)[:m]


def write_forgetting_csv(scores: ForgettingScores, path: str) -> None:
    """Export as CSV ``example_id,never_learned,count``."""
    from .tensor_io import atomic_write_text

    lines = ["example_id,never_learned,count"]
    for i in range(scores.counts.shape[0]):
        lines.append(f"{i},{int(scores.never_learned[i])},{int(scores.counts[i])}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def scores_as_reals(scores: ForgettingScores) -> np.ndarray:
    """Real-valued view for rank diagnostics: never_learned above any count.

    Maps count k to k and never_learned examples to (max observed count) + 1,
    preserving the total order among distinct scores. Index tie-breaking is
    the consumer's concern, as everywhere else.
    """
    top = float(scores.counts.max()) + 1.0
    return np.where(scores.never_learned, top, scores.counts.astype(np.float64))

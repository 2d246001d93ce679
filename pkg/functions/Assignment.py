"""Linear assignment between tracked objects (rows) and detections (columns)."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

logger = logging.getLogger(__name__)

# Entry of a cost matrix that may never be matched:
FORBIDDEN = np.inf

# Relative tolerance when comparing totals of competing optimal assignments:
TIE_TOLERANCE = 1e-9


@dataclass
class Assignment:
    """Result of matching rows to columns of a cost matrix."""

    matched: list[tuple[int, int, float]] = field(default_factory=list)
    unmatched_tracks: list[int] = field(default_factory=list)
    unmatched_detections: list[int] = field(default_factory=list)

    def total_cost(self: Assignment) -> float:
        return float(sum(cost for _, _, cost in self.matched))


def _optimal_total(work: np.ndarray) -> float:
    if work.size == 0:
        return 0.0
    rows, cols = linear_sum_assignment(work)
    return float(work[rows, cols].sum())


def _lexicographic_pairs(work: np.ndarray) -> list[tuple[int, int]]:
    """Optimal pairs, preferring lower (row, column) among equal-cost optima.

    Rows are fixed one after the other to the lowest column that still allows an
    optimal total for the remaining sub-problem.
    """
    best = _optimal_total(work)
    tolerance = TIE_TOLERANCE * max(1.0, abs(best))

    free_rows = list(range(work.shape[0]))
    free_cols = list(range(work.shape[1]))
    fixed_cost = 0.0
    pairs = []

    for row in range(work.shape[0]):
        if not free_cols:
            break
        rest_rows = [r for r in free_rows if r != row]
        chosen = None
        closest = (np.inf, None)
        for col in free_cols:
            rest_cols = [c for c in free_cols if c != col]
            total = (
                fixed_cost
                + work[row, col]
                + _optimal_total(work[np.ix_(rest_rows, rest_cols)])
            )
            if total <= best + tolerance:
                chosen = col
                break
            closest = min(closest, (total, col))

        # With no spare rows this row has to be matched somewhere:
        if chosen is None and len(free_rows) <= len(free_cols):
            chosen = closest[1]

        free_rows.remove(row)
        # Row left out of every optimum (only possible with more rows than columns):
        if chosen is None:
            continue

        fixed_cost += work[row, chosen]
        free_cols.remove(chosen)
        pairs.append((row, chosen))

    return pairs


def solve(m: np.ndarray) -> Assignment:
    """Minimum total cost matching of a rectangular cost matrix.

    FORBIDDEN (infinite) entries never appear among the matched pairs. Ties between
    optimal matchings are broken towards lower (track, detection) indices.

    Args:
        m (np.ndarray): (tracks, detections) cost matrix.

    Returns:
        Assignment: matched pairs with their cost and the unmatched indices.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"Cost matrix has to be two dimensional. Got shape: {m.shape}")

    n_rows, n_cols = m.shape
    if n_rows == 0 or n_cols == 0:
        return Assignment(
            matched=[],
            unmatched_tracks=list(range(n_rows)),
            unmatched_detections=list(range(n_cols)),
        )

    finite = np.isfinite(m)
    if (np.isnan(m)).any():
        raise ValueError("Cost matrix contains NaN entries.")

    # Forbidden entries are replaced by a cost no feasible matching can reach:
    largest = float(np.abs(m[finite]).max()) if finite.any() else 0.0
    blocked = (largest + 1.0) * (min(n_rows, n_cols) + 1)
    work = np.where(finite, m, blocked)

    pairs = _lexicographic_pairs(work)

    matched = [(row, col, float(m[row, col])) for row, col in pairs if finite[row, col]]
    matched_rows = {row for row, _, _ in matched}
    matched_cols = {col for _, col, _ in matched}

    return Assignment(
        matched=matched,
        unmatched_tracks=[row for row in range(n_rows) if row not in matched_rows],
        unmatched_detections=[
            col for col in range(n_cols) if col not in matched_cols
        ],
    )


def gate(a: Assignment, m: np.ndarray, tau_match: float) -> Assignment:
    """Demote matched pairs whose cost exceeds tau_match to unmatched.

    Raises:
        ValueError: if tau_match is outside (0, 1].
    """
    if not 0.0 < tau_match <= 1.0:
        raise ValueError(f"tau_match has to be in (0, 1]. Got: {tau_match}")

    m = np.asarray(m, dtype=float)
    kept = []
    rejected_tracks = []
    rejected_detections = []
    for row, col, cost in a.matched:
        if m[row, col] > tau_match:
            rejected_tracks.append(row)
            rejected_detections.append(col)
        else:
            kept.append((row, col, cost))

    if rejected_tracks:
        logger.debug(f"Gating rejected {len(rejected_tracks)} matched pairs.")

    return Assignment(
        matched=kept,
        unmatched_tracks=sorted(a.unmatched_tracks + rejected_tracks),
        unmatched_detections=sorted(a.unmatched_detections + rejected_detections),
    )

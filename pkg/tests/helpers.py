"""Shared oracle helpers kept deliberately independent of the library
implementations they check."""
from __future__ import annotations

import numpy as np


def greedy_match_cosines(planted: np.ndarray, recovered: np.ndarray) -> list[float]:
    """Greedy assignment of recovered rows to planted rows by cosine.

    Repeatedly pairs the highest-cosine unmatched (planted, recovered)
    rows; returns the matched cosines.
    """
    A = planted / np.linalg.norm(planted, axis=1, keepdims=True)
    B = recovered / np.maximum(np.linalg.norm(recovered, axis=1, keepdims=True), 1e-30)
    sims = A @ B.T
    out = []
    used_a: set[int] = set()
    used_b: set[int] = set()
    for _ in range(min(A.shape[0], B.shape[0])):
        best = None
        for i in range(A.shape[0]):
            if i in used_a:
                continue
            for j in range(B.shape[0]):
                if j in used_b:
                    continue
                if best is None or sims[i, j] > best[0]:
                    best = (sims[i, j], i, j)
        assert best is not None
        out.append(float(best[0]))
        used_a.add(best[1])
        used_b.add(best[2])
    return out


def brute_force_dominance(values: np.ndarray, station: int, source: int):
    """Per-timestamp argmax with tie exclusion, folded into maximal runs."""
    t, _, p = values.shape
    flags = []
    for i in range(t):
        row = values[i, station, :]
        best = row.max()
        winners = [s for s in range(p) if row[s] == best]
        flags.append(len(winners) == 1 and winners[0] == source)
    intervals = []
    start = None
    for i, f in enumerate(flags):
        if f and start is None:
            start = i
        elif not f and start is not None:
            intervals.append((start, i - 1))
            start = None
    if start is not None:
        intervals.append((start, t - 1))
    return intervals

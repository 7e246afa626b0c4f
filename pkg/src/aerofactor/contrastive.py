"""Cluster characterization via contrastive PCA over the station summary.

For a chosen cluster, its rows of the (n, p) summary matrix form the
target set and all remaining rows the background. The characteristic
direction is the top algebraic eigenvector of C_target - alpha * C_background.
A positive loading means the cluster runs higher in that source than the
background: the sign is pinned so the vector points from the background
mean toward the target mean.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import ClusterTooSmall, DegenerateCovarianceWarning, SingleCluster

AlphaMode = Union[str, float]  # "auto" or a fixed alpha >= 0

# {0} plus a geometric grid over 1e-2..1e2, nine steps per decade
ALPHA_GRID: tuple[float, ...] = (0.0,) + tuple(
    float(a) for a in np.logspace(-2.0, 2.0, 37)
)
FEASIBILITY_FRACTION = 0.1
SCORE_EPS = 1e-12


@dataclass(frozen=True)
class ClusterCharacteristic:
    cluster_id: int
    loadings: np.ndarray
    alpha: float
    eigengap: float
    reliable: bool = True


def _cov(rows: np.ndarray) -> np.ndarray:
    """Sample covariance centered on the set's own mean; zeros for < 2 rows."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    m, p = rows.shape
    if m < 2:
        return np.zeros((p, p))
    centered = rows - rows.mean(axis=0, keepdims=True)
    return (centered.T @ centered) / (m - 1)


def _top_eigpair(S: np.ndarray) -> tuple[float, float, np.ndarray]:
    """(lambda1, lambda2, v1) by algebraic order of the symmetric matrix."""
    vals, vecs = np.linalg.eigh(S)
    lam2 = float(vals[-2]) if vals.size > 1 else float(vals[-1])
    return float(vals[-1]), lam2, vecs[:, -1].copy()


def _sign_fix(a: np.ndarray, mean_diff: np.ndarray) -> np.ndarray:
    if float(a @ mean_diff) < 0:
        return -a
    return a


def characterize(
    Y: np.ndarray,
    labels: Sequence[int],
    cluster_id: int,
    alpha_mode: AlphaMode = "auto",
) -> ClusterCharacteristic:
    """Contrast one cluster against the rest of the stations.

    alpha_mode "auto" scans ALPHA_GRID and keeps the alpha maximizing
    target variance over background variance, subject to the direction
    retaining at least 10% of the target's top variance. A fixed float
    pins alpha directly.
    """
    Y = np.asarray(Y, dtype=float)
    labels = np.asarray(labels)
    tg = Y[labels == cluster_id]
    bg = Y[labels != cluster_id]
    if len(tg) < 2 or len(bg) < 2:
        raise ClusterTooSmall(
            f"cluster {cluster_id}: target has {len(tg)} members, background {len(bg)}"
        )

    C_tg = _cov(tg)
    C_bg = _cov(bg)
    mean_diff = tg.mean(axis=0) - bg.mean(axis=0)
    top_tg, _, _ = _top_eigpair(C_tg)

    degenerate = (
        not np.all(np.isfinite(C_tg))
        or not np.all(np.isfinite(C_bg))
        or top_tg <= SCORE_EPS
    )
    if degenerate:
        warnings.warn(
            f"cluster {cluster_id}: degenerate covariances, falling back to alpha=0",
            DegenerateCovarianceWarning,
        )
        lam1, lam2, a = _top_eigpair(np.nan_to_num(C_tg))
        return ClusterCharacteristic(
            cluster_id=int(cluster_id),
            loadings=_sign_fix(a, mean_diff),
            alpha=0.0,
            eigengap=lam1 - lam2,
            reliable=False,
        )

    if alpha_mode != "auto":
        alpha = float(alpha_mode)
        lam1, lam2, a = _top_eigpair(C_tg - alpha * C_bg)
        return ClusterCharacteristic(
            cluster_id=int(cluster_id),
            loadings=_sign_fix(a, mean_diff),
            alpha=alpha,
            eigengap=lam1 - lam2,
        )

    best = None  # (score, alpha, lam1, lam2, a)
    for alpha in ALPHA_GRID:
        lam1, lam2, a = _top_eigpair(C_tg - alpha * C_bg)
        var_tg = float(a @ C_tg @ a)
        if var_tg < FEASIBILITY_FRACTION * top_tg:
            continue
        score = var_tg / (float(a @ C_bg @ a) + SCORE_EPS)
        if best is None or score > best[0]:
            best = (score, alpha, lam1, lam2, a)
    assert best is not None  # alpha=0 is always feasible
    _, alpha, lam1, lam2, a = best
    return ClusterCharacteristic(
        cluster_id=int(cluster_id),
        loadings=_sign_fix(a, mean_diff),
        alpha=alpha,
        eigengap=lam1 - lam2,
    )


def characterize_all(
    Y: np.ndarray,
    labels: Sequence[int],
    alpha_mode: AlphaMode = "auto",
) -> list[ClusterCharacteristic]:
    """One characteristic per populated cluster, in cluster-id order.

    Clusters too small to contrast (singletons, or a singleton background)
    yield an unreliable record pointing from the background mean toward
    the cluster mean instead of an error.
    """
    labels = np.asarray(labels)
    ids = sorted(int(c) for c in np.unique(labels))
    if len(ids) < 2:
        raise SingleCluster("need at least two clusters to contrast")
    out = []
    for cid in ids:
        try:
            out.append(characterize(Y, labels, cid, alpha_mode))
        except ClusterTooSmall:
            Ya = np.asarray(Y, dtype=float)
            diff = Ya[labels == cid].mean(axis=0) - Ya[labels != cid].mean(axis=0)
            norm = float(np.linalg.norm(diff))
            if norm > 0:
                a = diff / norm
            else:
                a = np.zeros(Ya.shape[1])
                a[0] = 1.0
            out.append(
                ClusterCharacteristic(
                    cluster_id=cid, loadings=a, alpha=0.0, eigengap=0.0, reliable=False
                )
            )
    return out

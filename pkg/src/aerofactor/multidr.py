"""Two-step dimensionality reduction over the contribution tensor.

Step one compresses time: the (t, n, p) contribution tensor is unfolded
along timestamps to a (p*n, t) instance matrix (source-major, station
fastest), mean-centered per column, and projected onto its top principal
component, giving one summary value per (source, station) instance. The
resulting vector folds into the (n, p) summary matrix Y. Step two embeds
Y's rows into 2-D (UMAP by default, exact top-2 PCA as the fallback), and
k-means over the embedding groups the stations.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import (
    BadNeighborCount,
    DegenerateVarianceWarning,
    KTooLarge,
    ShapeMismatch,
    TooFewStations,
)
from .tensor import fold_to_station_by_source
from .umap_embed import UmapParams, umap_embed

DrMethod = Literal["umap", "pca2"]


@dataclass(frozen=True)
class ContributionTensor:
    """(t, n, p) tensor of per (timestamp, station) source contributions."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if v.ndim != 3:
            raise ShapeMismatch("contribution tensor must be 3-D (t, n, p)")
        if v.size and np.min(v) < 0:
            raise ShapeMismatch("contributions must be non-negative")

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.values.shape  # type: ignore[return-value]


@dataclass(frozen=True)
class StationEmbedding:
    Y: np.ndarray
    Z: np.ndarray
    pc1_explained: float
    cluster_labels: tuple[int, ...]
    k: int
    seed: int


def unfold_along_time(tensor: ContributionTensor) -> np.ndarray:
    """(t, n, p) -> (p*n, t) with instance q = k*n + j (station fastest)."""
    t, n, p = tensor.shape
    return tensor.values.transpose(2, 1, 0).reshape(p * n, t).copy()


def first_step_pca(tensor: ContributionTensor) -> tuple[np.ndarray, float]:
    """Compress the time axis to one value per (source, station) instance.

    Returns (Y, pc1_explained) where Y is (n, p). The PC sign is fixed so
    the scores correlate non-negatively with each instance's temporal
    mean, keeping "high = more contribution" readable. A tensor with no
    variance across instances falls back to the temporal means.
    """
    t, n, p = tensor.shape
    if t < 2:
        raise ShapeMismatch("need at least two timestamps for the temporal step")
    M = unfold_along_time(tensor)
    means = M.mean(axis=1)
    Mc = M - M.mean(axis=0, keepdims=True)

    total_var = float((Mc * Mc).sum())
    if total_var <= 1e-24:
        warnings.warn(
            "instances have no variance; using temporal means for the summary",
            DegenerateVarianceWarning,
        )
        return fold_to_station_by_source(means, n, p), 0.0

    U, S, Vt = np.linalg.svd(Mc, full_matrices=False)
    y = U[:, 0] * S[0]
    explained = float(S[0] ** 2 / (S**2).sum())

    # pin the arbitrary PC sign to the temporal means
    ym = y - y.mean()
    mm = means - means.mean()
    corr = float(ym @ mm)
    if corr < 0:
        y = -y
    return fold_to_station_by_source(y, n, p), explained


def pca2(Y: np.ndarray) -> np.ndarray:
    """Exact top-2 PCA projection of the rows of Y (deterministic sign)."""
    Y = np.asarray(Y, dtype=float)
    Yc = Y - Y.mean(axis=0, keepdims=True)
    U, S, Vt = np.linalg.svd(Yc, full_matrices=False)
    Z = np.zeros((Y.shape[0], 2))
    ncomp = min(2, S.size)
    # sign fixed by the largest-magnitude loading of each component
    for c in range(ncomp):
        v = Vt[c]
        if v[np.argmax(np.abs(v))] < 0:
            U[:, c] = -U[:, c]
        Z[:, c] = U[:, c] * S[c]
    return Z


def second_step_embed(
    Y: np.ndarray,
    method: DrMethod = "umap",
    params: UmapParams | None = None,
    seed: int = 0,
) -> np.ndarray:
    """Embed the (n, p) summary matrix into 2-D station coordinates."""
    Y = np.asarray(Y, dtype=float)
    n = Y.shape[0]
    if method == "pca2":
        Z = pca2(Y)
    elif method == "umap":
        if n < 3:
            raise TooFewStations(f"umap needs n >= 3 stations, got {n}")
        params = params or UmapParams()
        nn = params.n_neighbors if params.n_neighbors is not None else min(15, n - 1)
        if not (2 <= nn < n):
            raise BadNeighborCount(f"n_neighbors={nn} must satisfy 2 <= nn < n={n}")
        Z = umap_embed(
            Y,
            n_neighbors=nn,
            min_dist=params.min_dist,
            n_epochs=params.n_epochs,
            seed=seed,
        )
    else:
        raise ValueError(f"unknown embedding method {method!r}")
    if not np.all(np.isfinite(Z)):
        raise FloatingPointError("embedding produced non-finite coordinates")
    return Z


def _kmeans_once(X: np.ndarray, k: int, rng: np.random.Generator, max_iter: int = 300):
    n = X.shape[0]
    # k-means++ seeding
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    closest = np.sum((X - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = closest.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=closest / total))
        centers[c] = X[idx]
        closest = np.minimum(closest, np.sum((X - centers[c]) ** 2, axis=1))

    labels = np.zeros(n, dtype=int)
    for _ in range(max_iter):
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        for c in range(k):
            members = X[new_labels == c]
            if len(members):
                centers[c] = members.mean(axis=0)
            else:
                # re-seed an empty cluster at the worst-fit point
                worst = int(d2[np.arange(n), new_labels].argmax())
                centers[c] = X[worst]
                new_labels[worst] = c
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    inertia = float(d2[np.arange(n), labels].sum())
    return labels, inertia


def cluster_stations(
    Z: np.ndarray, k: int, seed: int = 0, n_restarts: int = 10
) -> tuple[int, ...]:
    """k-means over the 2-D embedding; labels renumbered by first occurrence.

    This is the default entry in CLUSTERERS; alternatives (e.g. a
    density-based method) can be registered under a new name and swapped
    in without touching callers.
    """
    X = np.asarray(Z, dtype=float)
    n = X.shape[0]
    if not (1 <= k <= n):
        raise KTooLarge(f"k={k} outside 1..{n}")
    rng = np.random.default_rng(seed)
    best_labels, best_inertia = None, np.inf
    for _ in range(n_restarts):
        labels, inertia = _kmeans_once(X, k, rng)
        if inertia < best_inertia - 1e-12:
            best_labels, best_inertia = labels, inertia
    assert best_labels is not None

    remap: dict[int, int] = {}
    out = []
    for lab in best_labels:
        if lab not in remap:
            remap[lab] = len(remap)
        out.append(remap[lab])
    return tuple(out)


# clustering is swappable: a clusterer maps (Z, k, seed) to station labels
CLUSTERERS = {"kmeans": cluster_stations}

"""Minimal UMAP: exact kNN graph, fuzzy set union, negative-sampling SGD.

Implements the standard pipeline for small point sets: per-point bandwidth
calibration against a log2(k) target, probabilistic t-conorm symmetrization,
and a cross-entropy layout optimized edge-by-edge with negative sampling.
Initialization is top-2 PCA scaled to the usual +-10 box with seeded
jitter, which keeps the whole embedding deterministic for a fixed seed.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

SMOOTH_K_TOLERANCE = 1e-5
MIN_K_DIST_SCALE = 1e-3


@dataclass(frozen=True)
class UmapParams:
    n_neighbors: int | None = None  # None -> min(15, n - 1)
    min_dist: float = 0.1
    spread: float = 1.0
    n_epochs: int = 500
    negative_sample_rate: int = 5
    learning_rate: float = 1.0

    def to_dict(self) -> dict:
        return {
            "n_neighbors": self.n_neighbors,
            "min_dist": self.min_dist,
            "spread": self.spread,
            "n_epochs": self.n_epochs,
            "negative_sample_rate": self.negative_sample_rate,
            "learning_rate": self.learning_rate,
        }


def find_ab_params(spread: float, min_dist: float) -> tuple[float, float]:
    """Fit the rational kernel 1/(1 + a d^(2b)) to the min_dist/spread curve."""

    def curve(x, a, b):
        return 1.0 / (1.0 + a * x ** (2 * b))

    xv = np.linspace(0, spread * 3, 300)
    yv = np.zeros_like(xv)
    yv[xv < min_dist] = 1.0
    yv[xv >= min_dist] = np.exp(-(xv[xv >= min_dist] - min_dist) / spread)
    params, _ = curve_fit(curve, xv, yv)
    return float(params[0]), float(params[1])


def smooth_knn_calibration(
    knn_dists: np.ndarray, n_iter: int = 64
) -> tuple[np.ndarray, np.ndarray]:
    """Per-point (sigma, rho) so that sum_j exp(-(d_ij - rho_i)/sigma_i) hits
    log2(k). Column 0 is the self-distance and is skipped."""
    n, k = knn_dists.shape
    target = math.log2(k)
    rhos = np.zeros(n)
    sigmas = np.zeros(n)
    mean_all = float(knn_dists.mean()) or 1.0

    for i in range(n):
        row = knn_dists[i]
        nonzero = row[row > 0.0]
        rhos[i] = float(nonzero.min()) if nonzero.size else 0.0

        lo, hi, mid = 0.0, np.inf, 1.0
        for _ in range(n_iter):
            psum = 0.0
            for j in range(1, k):
                d = row[j] - rhos[i]
                psum += math.exp(-d / mid) if d > 0 else 1.0
            if abs(psum - target) < SMOOTH_K_TOLERANCE:
                break
            if psum > target:
                hi = mid
                mid = (lo + hi) / 2.0
            else:
                lo = mid
                mid = mid * 2.0 if hi == np.inf else (lo + hi) / 2.0
        sigmas[i] = mid

        mean_i = float(row.mean())
        if rhos[i] > 0.0:
            sigmas[i] = max(sigmas[i], MIN_K_DIST_SCALE * mean_i)
        else:
            sigmas[i] = max(sigmas[i], MIN_K_DIST_SCALE * mean_all)
    return sigmas, rhos


def fuzzy_graph(X: np.ndarray, n_neighbors: int) -> np.ndarray:
    """Symmetric fuzzy membership matrix (dense; point sets here are small)."""
    n = X.shape[0]
    d2 = ((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2)
    dists = np.sqrt(np.maximum(d2, 0.0))
    # neighbor lists include the point itself in column 0
    order = np.argsort(dists, axis=1, kind="stable")[:, :n_neighbors]
    knn_dists = np.take_along_axis(dists, order, axis=1)
    sigmas, rhos = smooth_knn_calibration(knn_dists)

    A = np.zeros((n, n))
    for i in range(n):
        for c in range(1, n_neighbors):
            j = order[i, c]
            if j == i:
                continue
            d = knn_dists[i, c] - rhos[i]
            A[i, j] = 1.0 if d <= 0 else math.exp(-d / sigmas[i])
    return A + A.T - A * A.T


def _pca_init(X: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    Xc = X - X.mean(axis=0, keepdims=True)
    U, S, Vt = np.linalg.svd(Xc, full_matrices=False)
    emb = np.zeros((X.shape[0], 2))
    ncomp = min(2, S.size)
    emb[:, :ncomp] = U[:, :ncomp] * S[:ncomp]
    scale = np.abs(emb).max()
    if scale > 0:
        emb = emb * (10.0 / scale)
    return emb + rng.normal(0.0, 1e-4, size=emb.shape)


def umap_embed(
    X: np.ndarray,
    n_neighbors: int,
    min_dist: float = 0.1,
    n_epochs: int = 500,
    seed: int = 0,
    spread: float = 1.0,
    negative_sample_rate: int = 5,
    learning_rate: float = 1.0,
) -> np.ndarray:
    """Embed rows of X into 2-D. Deterministic for a fixed seed."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    graph = fuzzy_graph(X, n_neighbors)
    a, b = find_ab_params(spread, min_dist)

    heads, tails, weights = [], [], []
    for i in range(n):
        for j in range(n):
            if graph[i, j] > 0.0 and i != j:
                heads.append(i)
                tails.append(j)
                weights.append(graph[i, j])
    if not heads:
        # fully disconnected degenerate input: keep the init layout
        return _pca_init(X, np.random.default_rng(seed))

    w = np.asarray(weights)
    # edges are sampled in proportion to membership strength
    eps = np.full(len(w), np.inf)
    n_samples = n_epochs * (w / w.max())
    eps[n_samples > 0] = n_epochs / n_samples[n_samples > 0]
    eps_neg = eps / negative_sample_rate

    rng = np.random.default_rng(seed)
    emb = _pca_init(X, rng)
    pos = [[float(x), float(y)] for x, y in emb]
    next_pos = list(eps)
    next_neg = list(eps_neg)
    neg_rng = random.Random(seed)

    n_edges = len(heads)
    alpha = learning_rate
    for epoch in range(n_epochs):
        for e in range(n_edges):
            if next_pos[e] > epoch:
                continue
            i, j = heads[e], tails[e]
            ci, cj = pos[i], pos[j]
            dx, dy = ci[0] - cj[0], ci[1] - cj[1]
            dist_sq = dx * dx + dy * dy
            if dist_sq > 0.0:
                coeff = (-2.0 * a * b * math.pow(dist_sq, b - 1.0)) / (
                    a * math.pow(dist_sq, b) + 1.0
                )
                gx = max(-4.0, min(4.0, coeff * dx)) * alpha
                gy = max(-4.0, min(4.0, coeff * dy)) * alpha
                ci[0] += gx
                ci[1] += gy
                cj[0] -= gx
                cj[1] -= gy
            next_pos[e] += eps[e]

            n_neg = max(0, int((epoch - next_neg[e]) / eps_neg[e]))
            for _ in range(n_neg):
                k = neg_rng.randrange(n)
                ck = pos[k]
                dx, dy = ci[0] - ck[0], ci[1] - ck[1]
                dist_sq = dx * dx + dy * dy
                if dist_sq > 0.0:
                    coeff = (2.0 * b) / (
                        (0.001 + dist_sq) * (a * math.pow(dist_sq, b) + 1.0)
                    )
                    gx = max(-4.0, min(4.0, coeff * dx)) * alpha
                    gy = max(-4.0, min(4.0, coeff * dy)) * alpha
                elif i == k:
                    continue
                else:
                    gx, gy = 4.0 * alpha, 4.0 * alpha
                ci[0] += gx
                ci[1] += gy
            next_neg[e] += n_neg * eps_neg[e]
        alpha = learning_rate * (1.0 - epoch / n_epochs)

    return np.asarray(pos, dtype=float)

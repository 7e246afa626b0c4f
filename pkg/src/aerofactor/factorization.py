"""Source extraction via non-negative matrix factorization.

The unfolded (t*n, d) matrix V is factored as V ~ W H with W >= 0, H >= 0
by minimizing the Frobenius reconstruction error. Initialization is
nonnegative double SVD; iterations are the classic multiplicative updates,
whose monotone objective is asserted by the test suite. Rows of H are the
extracted sources ("concentrations" after row-wise l2 normalization);
rows of W give per (station, timestamp) source "contributions" after
row-wise l1 normalization.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

import numpy as np

from .errors import IndexOutOfRange, NegativeEntry, NonNegativityViolation, RankTooLarge
from .tensor import NormalizedMatrix, UnfoldedMatrix, normalize_rows, source_labels

EPS = 1e-12

InitFill = Literal["keep", "mean", "random"]


@dataclass(frozen=True)
class FactorizationResult:
    W: np.ndarray
    H: np.ndarray
    W_hat: NormalizedMatrix
    H_hat: NormalizedMatrix
    p: int
    objective_trace: tuple[float, ...]
    explained_variance_ratio: float
    seed: int

    @property
    def labels(self) -> list[str]:
        return source_labels(self.p)


@dataclass(frozen=True)
class SourceProfile:
    source_id: str
    concentrations: np.ndarray
    top_species: tuple[str, ...]


def nndsvd(V: np.ndarray, p: int, fill: InitFill = "keep", seed: int = 0):
    """Nonnegative double SVD initialization.

    fill='keep' leaves the sign-split zeros in place, 'mean' replaces them
    with the matrix mean, 'random' with small seeded uniform noise (the
    only variant that consumes the seed).
    """
    U, S, Vt = np.linalg.svd(V, full_matrices=False)
    m, n = V.shape
    W = np.zeros((m, p))
    H = np.zeros((p, n))

    # leading pair of a non-negative matrix can be taken non-negative
    W[:, 0] = np.sqrt(S[0]) * np.abs(U[:, 0])
    H[0, :] = np.sqrt(S[0]) * np.abs(Vt[0, :])

    for j in range(1, p):
        x, y = U[:, j], Vt[j, :]
        xp, xn = np.maximum(x, 0), np.maximum(-x, 0)
        yp, yn = np.maximum(y, 0), np.maximum(-y, 0)
        xp_n, xn_n = np.linalg.norm(xp), np.linalg.norm(xn)
        yp_n, yn_n = np.linalg.norm(yp), np.linalg.norm(yn)
        mu_p, mu_n = xp_n * yp_n, xn_n * yn_n
        if mu_p >= mu_n:
            u = xp / xp_n if xp_n > 0 else xp
            v = yp / yp_n if yp_n > 0 else yp
            sigma = mu_p
        else:
            u = xn / xn_n if xn_n > 0 else xn
            v = yn / yn_n if yn_n > 0 else yn
            sigma = mu_n
        W[:, j] = np.sqrt(S[j] * sigma) * u
        H[j, :] = np.sqrt(S[j] * sigma) * v

    if fill == "mean":
        mu = V.mean()
        W[W == 0] = mu
        H[H == 0] = mu
    elif fill == "random":
        rng = np.random.default_rng(seed)
        mu = V.mean()
        wz = W == 0
        hz = H == 0
        W[wz] = rng.uniform(0.0, mu / 100.0, size=int(wz.sum()))
        H[hz] = rng.uniform(0.0, mu / 100.0, size=int(hz.sum()))
    elif fill != "keep":
        raise ValueError(f"unknown fill variant {fill!r}")
    return W, H


def run_nmf(
    matrix: UnfoldedMatrix | np.ndarray,
    p: int,
    seed: int = 0,
    max_iter: int = 500,
    tol: float = 1e-6,
    init_fill: InitFill = "keep",
) -> FactorizationResult:
    """Factor the non-negative matrix into p sources.

    Multiplicative updates stop when the relative objective change drops
    below tol or after max_iter iterations. Deterministic for a fixed
    (matrix, p, seed): the seed only feeds the 'random' init fill.
    """
    V = matrix.values if isinstance(matrix, UnfoldedMatrix) else np.asarray(matrix, float)
    if V.ndim != 2:
        raise RankTooLarge("expected a 2-D matrix")
    if V.size and np.min(V) < 0:
        raise NegativeEntry("NMF input must be non-negative")
    m, n = V.shape
    if not (1 <= p <= min(m, n)):
        raise RankTooLarge(f"p={p} outside 1..min{V.shape}")

    W, H = nndsvd(V, p, fill=init_fill, seed=seed)

    def loss(W, H):
        return float(np.linalg.norm(V - W @ H))

    trace = [loss(W, H)]
    for _ in range(max_iter):
        H *= (W.T @ V) / (W.T @ W @ H + EPS)
        W *= (V @ H.T) / (W @ (H @ H.T) + EPS)
        if __debug__ and (np.min(H) < 0 or np.min(W) < 0):
            raise NonNegativityViolation("multiplicative update produced a negative")
        trace.append(loss(W, H))
        prev, cur = trace[-2], trace[-1]
        if prev <= EPS or (prev - cur) / prev < tol:
            break

    ss_res = trace[-1] ** 2
    ss_tot = float(np.sum((V - V.mean()) ** 2))
    if ss_tot <= EPS:
        evr = 1.0 if ss_res <= EPS else 0.0
    else:
        evr = float(np.clip(1.0 - ss_res / ss_tot, 0.0, 1.0))

    return FactorizationResult(
        W=W,
        H=H,
        W_hat=normalize_rows(W, "l1_rows"),
        H_hat=normalize_rows(H, "l2_rows"),
        p=p,
        objective_trace=tuple(trace),
        explained_variance_ratio=evr,
        seed=seed,
    )


def rank_species(
    H_hat: NormalizedMatrix | np.ndarray,
    features: Sequence[str],
    top: int | None = 15,
) -> list[str]:
    """Species sorted by descending column sums of the normalized H.

    Ties keep the original feature order; top=None returns the full list.
    """
    values = H_hat.values if isinstance(H_hat, NormalizedMatrix) else np.asarray(H_hat)
    totals = values.sum(axis=0)
    # stable sort on negated totals preserves feature order among ties
    order = np.argsort(-totals, kind="stable")
    ranked = [features[i] for i in order]
    return ranked if top is None else ranked[:top]


def interpret_row(
    H_hat: NormalizedMatrix | np.ndarray,
    row: int,
    features: Sequence[str],
    top: int | None = None,
) -> SourceProfile:
    """Per-source profile: the concentration row plus its ranked species."""
    values = H_hat.values if isinstance(H_hat, NormalizedMatrix) else np.asarray(H_hat)
    p = values.shape[0]
    if not (0 <= row < p):
        raise IndexOutOfRange(f"row {row} outside 0..{p - 1}")
    conc = values[row]
    order = np.argsort(-conc, kind="stable")
    ranked = tuple(features[i] for i in order)
    if top is not None:
        ranked = ranked[:top]
    return SourceProfile(
        source_id=source_labels(p)[row], concentrations=conc.copy(), top_species=ranked
    )


def select_p_diagnostics(
    matrix: UnfoldedMatrix | np.ndarray,
    p_range: Iterable[int],
    seed: int = 0,
    max_iter: int = 500,
    tol: float = 1e-6,
) -> list[tuple[int, float, float]]:
    """One NMF run per candidate p; returns (p, explained variance, objective)."""
    rows = []
    for p in p_range:
        res = run_nmf(matrix, p, seed=seed, max_iter=max_iter, tol=tol)
        rows.append((p, res.explained_variance_ratio, res.objective_trace[-1]))
    return rows

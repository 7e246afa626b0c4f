"""Core tensor/matrix types: unfolding, folding, row normalization, imputation.

The third-order array is laid out (time, station, feature). Unfolding is
timestamp-major with the station index moving fastest, i.e. row r of the
unfolded matrix corresponds to (time i, station j) with r = i*n + j. The
station-by-source fold used by the embedding step is source-major with the
station index moving fastest: Y[j, k] = vec[k*n + j]. Both orderings are
fixed here and threaded through every fold/unfold pair.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from typing import Literal, Sequence

import numpy as np

from .errors import (
    AllMissingFeature,
    NegativeEntry,
    ShapeMismatch,
    UnimputedData,
)

NormKind = Literal["l1_rows", "l2_rows"]
ImputePolicy = Literal["interpolate", "median", "zero"]


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.asarray(a)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ImputationReport:
    """Filled-cell counts per (station, feature), produced by impute()."""

    policy: str
    counts: dict[tuple[str, str], int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True)
class SpatioTemporalTensor:
    """Non-negative species concentrations on a (time, station, feature) grid.

    `mask` marks observed entries; unobserved values are undefined until
    impute() fills them. All observed values must be >= 0 and time_index
    must be strictly increasing.
    """

    values: np.ndarray
    mask: np.ndarray
    time_index: tuple[datetime, ...]
    station_index: tuple[str, ...]
    feature_index: tuple[str, ...]
    imputation: ImputationReport | None = field(default=None, compare=False)

    def __post_init__(self):
        values = _frozen(np.asarray(self.values, dtype=float))
        mask = _frozen(np.asarray(self.mask, dtype=bool))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "time_index", tuple(self.time_index))
        object.__setattr__(self, "station_index", tuple(self.station_index))
        object.__setattr__(self, "feature_index", tuple(self.feature_index))
        if values.ndim != 3:
            raise ShapeMismatch(f"values must be 3-D, got {values.ndim}-D")
        if values.shape != mask.shape:
            raise ShapeMismatch(
                f"values {values.shape} and mask {mask.shape} differ"
            )
        t, n, d = values.shape
        if (len(self.time_index), len(self.station_index), len(self.feature_index)) != (t, n, d):
            raise ShapeMismatch(
                "index lengths "
                f"({len(self.time_index)}, {len(self.station_index)}, {len(self.feature_index)}) "
                f"do not match values shape {values.shape}"
            )
        if any(b <= a for a, b in zip(self.time_index, self.time_index[1:])):
            raise ShapeMismatch("time_index must be strictly increasing")
        observed = values[mask]
        if observed.size and (np.min(observed) < 0 or not np.all(np.isfinite(observed))):
            raise NegativeEntry("observed values must be finite and >= 0")

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.values.shape  # type: ignore[return-value]

    def is_complete(self) -> bool:
        return bool(self.mask.all())


@dataclass(frozen=True)
class UnfoldedMatrix:
    """(t*n, d) matrix with row r = i*n + j for (time i, station j)."""

    values: np.ndarray
    t: int
    n: int

    def __post_init__(self):
        values = _frozen(np.asarray(self.values, dtype=float))
        object.__setattr__(self, "values", values)
        if values.ndim != 2 or values.shape[0] != self.t * self.n:
            raise ShapeMismatch(
                f"expected ({self.t * self.n}, d) matrix, got {values.shape}"
            )

    def row_order(self) -> list[tuple[int, int]]:
        """Row r -> (time i, station j), timestamp-major, station fastest."""
        return [(r // self.n, r % self.n) for r in range(self.t * self.n)]

    def to_tensor_values(self) -> np.ndarray:
        d = self.values.shape[1]
        return self.values.reshape(self.t, self.n, d)


@dataclass(frozen=True)
class NormalizedMatrix:
    """Row-normalized non-negative matrix; all-zero rows pass through."""

    values: np.ndarray
    norm_kind: NormKind
    zero_rows: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(np.asarray(self.values, dtype=float)))
        object.__setattr__(self, "zero_rows", tuple(self.zero_rows))


def unfold(tensor: SpatioTemporalTensor) -> UnfoldedMatrix:
    """Reshape the (t, n, d) tensor into a (t*n, d) matrix.

    Raises UnimputedData when the mask still has gaps; call impute() first.
    """
    if not tensor.is_complete():
        missing = int((~tensor.mask).sum())
        raise UnimputedData(f"{missing} cells are missing; impute before unfolding")
    t, n, d = tensor.shape
    return UnfoldedMatrix(values=tensor.values.reshape(t * n, d), t=t, n=n)


def fold_to_station_by_source(vec: np.ndarray, n: int, p: int) -> np.ndarray:
    """Fold a length-(n*p) vector into an (n, p) matrix: Y[j, k] = vec[k*n + j]."""
    v = np.asarray(vec, dtype=float).ravel()
    if v.size != n * p:
        raise ShapeMismatch(f"vector length {v.size} != n*p = {n * p}")
    return v.reshape(p, n).T.copy()


def flatten_station_by_source(Y: np.ndarray) -> np.ndarray:
    """Inverse of fold_to_station_by_source: vec[k*n + j] = Y[j, k]."""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2:
        raise ShapeMismatch("expected an (n, p) matrix")
    return Y.T.reshape(-1).copy()


def normalize_rows(m: np.ndarray, kind: NormKind) -> NormalizedMatrix:
    """Scale each row to unit l1 or l2 norm; zero rows are left untouched."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ShapeMismatch("expected a 2-D matrix")
    if m.size and np.min(m) < 0:
        raise NegativeEntry("normalize_rows requires non-negative entries")
    if kind == "l1_rows":
        norms = m.sum(axis=1)
    elif kind == "l2_rows":
        norms = np.sqrt((m * m).sum(axis=1))
    else:
        raise ValueError(f"unknown norm kind {kind!r}")
    zero = norms == 0
    safe = np.where(zero, 1.0, norms)
    out = m / safe[:, None]
    return NormalizedMatrix(
        values=out, norm_kind=kind, zero_rows=tuple(int(i) for i in np.flatnonzero(zero))
    )


def impute(
    tensor: SpatioTemporalTensor, policy: ImputePolicy = "interpolate"
) -> SpatioTemporalTensor:
    """Fill masked cells so the returned tensor is fully observed.

    Policies:
      interpolate -- per (station, feature) linear interpolation over the
        time axis, holding the nearest observed value at the edges.
        Raises AllMissingFeature when a series has no observations.
      median -- per-feature median over all observed entries; a feature
        with no observations anywhere falls back to the median of every
        observed entry in the tensor.
      zero -- fill with 0.

    Observed entries are never modified. An ImputationReport with fill
    counts per (station, feature) is attached to the result.
    """
    if tensor.is_complete():
        return SpatioTemporalTensor(
            values=tensor.values,
            mask=tensor.mask,
            time_index=tensor.time_index,
            station_index=tensor.station_index,
            feature_index=tensor.feature_index,
            imputation=ImputationReport(policy=policy, counts={}),
        )

    t, n, d = tensor.shape
    values = tensor.values.copy()
    mask = tensor.mask
    counts: dict[tuple[str, str], int] = {}

    if policy == "zero":
        values[~mask] = 0.0
    elif policy == "median":
        any_observed = tensor.values[mask]
        if any_observed.size == 0:
            raise AllMissingFeature("tensor has no observed entries at all")
        global_median = float(np.median(any_observed))
        for f in range(d):
            col_mask = mask[:, :, f]
            observed = tensor.values[:, :, f][col_mask]
            fill = float(np.median(observed)) if observed.size else global_median
            col = values[:, :, f]
            col[~col_mask] = fill
    elif policy == "interpolate":
        idx = np.arange(t, dtype=float)
        for j in range(n):
            for f in range(d):
                series_mask = mask[:, j, f]
                if series_mask.all():
                    continue
                obs = np.flatnonzero(series_mask)
                if obs.size == 0:
                    raise AllMissingFeature(
                        f"station {tensor.station_index[j]!r}, feature "
                        f"{tensor.feature_index[f]!r} has no observations"
                    )
                gaps = np.flatnonzero(~series_mask)
                # np.interp holds edge values constant outside the observed range
                values[gaps, j, f] = np.interp(
                    idx[gaps], idx[obs], tensor.values[obs, j, f]
                )
    else:
        raise ValueError(f"unknown imputation policy {policy!r}")

    filled = ~mask
    for j in range(n):
        for f in range(d):
            c = int(filled[:, j, f].sum())
            if c:
                counts[(tensor.station_index[j], tensor.feature_index[f])] = c

    return SpatioTemporalTensor(
        values=values,
        mask=np.ones_like(mask),
        time_index=tensor.time_index,
        station_index=tensor.station_index,
        feature_index=tensor.feature_index,
        imputation=ImputationReport(policy=policy, counts=counts),
    )


def source_labels(p: int) -> list[str]:
    """Letter labels A, B, ... for factor rows; AA, AB, ... past 26."""
    labels = []
    for i in range(p):
        if i < 26:
            labels.append(chr(ord("A") + i))
        else:
            labels.append(chr(ord("A") + i // 26 - 1) + chr(ord("A") + i % 26))
    return labels

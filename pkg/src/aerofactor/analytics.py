"""Correlation, aggregation, dominance, geospatial and anomaly summaries.

Everything here is a pure read over pipeline outputs: the contribution
tensor, cluster labels, aligned auxiliary series, and the dense PM2.5
grid fleet.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .ingest import AuxiliarySeries, GridSensorSet
from .multidr import ContributionTensor
from .tensor import source_labels


@dataclass(frozen=True)
class CorrelationTable:
    rows: tuple[str, ...]  # source ids
    cols: tuple[str, ...]  # measure names
    r: np.ndarray  # NaN where undefined
    n_pairs: np.ndarray


@dataclass(frozen=True)
class TransitionSeries:
    cluster_series: dict[tuple[int, int], np.ndarray]  # (cluster, source) -> t-vector
    station_series: dict[tuple[str, int], np.ndarray]  # (station, source) -> t-vector
    pm25: dict[str, list[tuple[datetime, float | None]]]  # hourly, gaps preserved


@dataclass(frozen=True)
class GridCell:
    row: int
    col: int
    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float
    mean: float
    count: int


@dataclass(frozen=True)
class GridSlice:
    cell_deg: float
    timestamp: datetime
    cells: tuple[GridCell, ...]


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    """Pearson r, NaN when either side is constant."""
    xc = x - x.mean()
    yc = y - y.mean()
    sx = float(xc @ xc)
    sy = float(yc @ yc)
    if sx <= 0 or sy <= 0:
        return math.nan
    return float((xc @ yc) / math.sqrt(sx * sy))


def correlate_sources(
    contributions: ContributionTensor,
    station_index: Sequence[str],
    aligned_measures: Sequence[AuxiliarySeries],
    time_index: Sequence[datetime],
) -> CorrelationTable:
    """Pearson r between each source's contribution and each aligned measure.

    Pairs where the measure is missing are dropped listwise; cells backed
    by fewer than 3 pairs or a constant side are left undefined (NaN).
    """
    t, n, p = contributions.shape
    rows = tuple(source_labels(p))
    cols = tuple(m.name for m in aligned_measures)
    r = np.full((p, len(cols)), np.nan)
    n_pairs = np.zeros((p, len(cols)), dtype=int)

    for mi, measure in enumerate(aligned_measures):
        pairs_idx = [
            (i, j)
            for i in range(t)
            for j in range(n)
            if (station_index[j], time_index[i]) in measure.samples
        ]
        if not pairs_idx:
            continue
        mv = np.array(
            [measure.samples[(station_index[j], time_index[i])] for i, j in pairs_idx]
        )
        for s in range(p):
            sv = np.array([contributions.values[i, j, s] for i, j in pairs_idx])
            n_pairs[s, mi] = len(pairs_idx)
            if len(pairs_idx) >= 3:
                r[s, mi] = _pearson(sv, mv)
    return CorrelationTable(rows=rows, cols=cols, r=r, n_pairs=n_pairs)


def cluster_transitions(
    contributions: ContributionTensor,
    labels: Sequence[int],
    station_index: Sequence[str],
    pm25: Mapping[str, list[tuple[datetime, float | None]]] | None = None,
) -> TransitionSeries:
    """Average member-station contributions per cluster at each timestamp."""
    t, n, p = contributions.shape
    labels = list(labels)
    station_series = {
        (station_index[j], s): contributions.values[:, j, s].copy()
        for j in range(n)
        for s in range(p)
    }
    cluster_series: dict[tuple[int, int], np.ndarray] = {}
    for c in sorted(set(labels)):
        members = [j for j, lab in enumerate(labels) if lab == c]
        for s in range(p):
            cluster_series[(c, s)] = contributions.values[:, members, s].mean(axis=1)
    return TransitionSeries(
        cluster_series=cluster_series,
        station_series=station_series,
        pm25=dict(pm25) if pm25 else {},
    )


def dominance_periods(
    contributions: ContributionTensor, station: int, source: int
) -> list[tuple[int, int]]:
    """Maximal [start, end] index runs where the source strictly leads.

    A timestamp counts only when the source's contribution is strictly
    greater than every other source's at that station; ties break the run.
    """
    t, n, p = contributions.shape
    vals = contributions.values[:, station, :]
    dominant = np.ones(t, dtype=bool)
    for s in range(p):
        if s == source:
            continue
        dominant &= vals[:, source] > vals[:, s]
    intervals: list[tuple[int, int]] = []
    start = None
    for i in range(t):
        if dominant[i] and start is None:
            start = i
        elif not dominant[i] and start is not None:
            intervals.append((start, i - 1))
            start = None
    if start is not None:
        intervals.append((start, t - 1))
    return intervals


def grid_pm25(grid: GridSensorSet, cell_deg: float, timestamp: datetime) -> GridSlice:
    """Average the fleet's readings at one timestamp onto a lat/lon grid.

    Cells partition the sensors' bounding box from its south-west corner;
    a sensor exactly on a boundary lands in the higher-index cell. Cells
    with no readings at the timestamp are omitted.
    """
    if cell_deg <= 0:
        raise ValueError("cell_deg must be positive")
    if not grid.sensors:
        return GridSlice(cell_deg=cell_deg, timestamp=timestamp, cells=())
    lat0 = min(s[1] for s in grid.sensors)
    lon0 = min(s[2] for s in grid.sensors)

    acc: dict[tuple[int, int], list[float]] = {}
    for sid, lat, lon in grid.sensors:
        v = grid.readings.get((sid, timestamp))
        if v is None:
            continue
        cell = (int(math.floor((lat - lat0) / cell_deg)), int(math.floor((lon - lon0) / cell_deg)))
        acc.setdefault(cell, []).append(v)

    cells = tuple(
        GridCell(
            row=row,
            col=col,
            lat_min=lat0 + row * cell_deg,
            lat_max=lat0 + (row + 1) * cell_deg,
            lon_min=lon0 + col * cell_deg,
            lon_max=lon0 + (col + 1) * cell_deg,
            mean=float(np.mean(vals)),
            count=len(vals),
        )
        for (row, col), vals in sorted(acc.items())
    )
    return GridSlice(cell_deg=cell_deg, timestamp=timestamp, cells=cells)


ThresholdMode = Union[tuple[str, float], list]


def anomaly_scan(
    series_by_station: Mapping[str, Iterable[tuple[datetime, float | None]]],
    threshold_mode: ThresholdMode,
) -> list[tuple[str, datetime, float]]:
    """Flag outlying readings, sorted by value descending.

    ("absolute", v) flags readings strictly above v. ("robust-z", z) flags
    |x - median| / (1.4826 * MAD) > z per station; a station with MAD = 0
    yields no anomalies.
    """
    mode, threshold = threshold_mode[0], float(threshold_mode[1])
    flagged: list[tuple[str, datetime, float]] = []
    for sid, series in series_by_station.items():
        points = [(ts, v) for ts, v in series if v is not None]
        if not points:
            continue
        if mode == "absolute":
            flagged.extend((sid, ts, v) for ts, v in points if v > threshold)
        elif mode == "robust-z":
            vals = np.array([v for _, v in points])
            med = float(np.median(vals))
            mad = float(np.median(np.abs(vals - med)))
            if mad == 0:
                continue
            scale = 1.4826 * mad
            flagged.extend(
                (sid, ts, v) for ts, v in points if abs(v - med) / scale > threshold
            )
        else:
            raise ValueError(f"unknown threshold mode {mode!r}")
    flagged.sort(key=lambda rec: (-rec[2], rec[0], rec[1]))
    return flagged

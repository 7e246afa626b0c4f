"""End-to-end pipeline: impute -> unfold -> NMF -> fold -> two-step DR ->
k-means -> contrastive characterization -> analytics precomputation.

The result object carries every artifact the six linked views read, and
the payload builders here render them to JSON-ready structures. The CLI
export path and the HTTP service share these builders, so batch outputs
and service responses agree field-for-field.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import analytics as an
from . import contrastive as cc
from . import factorization as fz
from . import ingest, multidr
from .errors import ConfigBounds
from .ingest import AuxiliarySeries, GridSensorSet, StationCatalog
from .multidr import ContributionTensor, StationEmbedding
from .tensor import SpatioTemporalTensor, impute, source_labels, unfold
from .umap_embed import UmapParams

IMPUTE_POLICIES = ("interpolate", "median", "zero")
DR_METHODS = ("umap", "pca2")


@dataclass(frozen=True)
class PipelineConfig:
    p: int
    k: int
    seed: int = 0
    dr_method: str = "umap"
    n_neighbors: int | None = None
    min_dist: float = 0.1
    n_epochs: int = 500
    alpha_mode: str | float = "auto"
    impute_policy: str = "interpolate"
    cell_deg: float = 0.05
    nmf_max_iter: int = 500
    nmf_tol: float = 1e-6
    nmf_init_fill: str = "keep"
    # correlate raw W instead of the row-normalized contributions
    correlate_raw_w: bool = False

    def validate(self) -> None:
        if self.p < 1:
            raise ConfigBounds("p must be >= 1")
        if self.k < 1:
            raise ConfigBounds("k must be >= 1")
        if self.dr_method not in DR_METHODS:
            raise ConfigBounds(f"dr_method must be one of {DR_METHODS}")
        if self.impute_policy not in IMPUTE_POLICIES:
            raise ConfigBounds(f"impute_policy must be one of {IMPUTE_POLICIES}")
        if self.alpha_mode != "auto":
            try:
                alpha = float(self.alpha_mode)  # type: ignore[arg-type]
            except (TypeError, ValueError):
                raise ConfigBounds("alpha_mode must be 'auto' or a number") from None
            if alpha < 0:
                raise ConfigBounds("fixed alpha must be >= 0")
        if self.cell_deg <= 0:
            raise ConfigBounds("cell_deg must be positive")
        if self.n_neighbors is not None and self.n_neighbors < 2:
            raise ConfigBounds("n_neighbors must be >= 2")
        if self.min_dist < 0:
            raise ConfigBounds("min_dist must be >= 0")
        if self.n_epochs < 1 or self.nmf_max_iter < 1:
            raise ConfigBounds("iteration counts must be >= 1")
        if self.nmf_tol <= 0:
            raise ConfigBounds("nmf_tol must be positive")
        if self.nmf_init_fill not in ("keep", "mean", "random"):
            raise ConfigBounds("nmf_init_fill must be keep, mean, or random")

    def to_dict(self) -> dict[str, Any]:
        return {
            "p": self.p,
            "k": self.k,
            "seed": self.seed,
            "dr_method": self.dr_method,
            "n_neighbors": self.n_neighbors,
            "min_dist": self.min_dist,
            "n_epochs": self.n_epochs,
            "alpha_mode": self.alpha_mode,
            "impute_policy": self.impute_policy,
            "cell_deg": self.cell_deg,
            "nmf_max_iter": self.nmf_max_iter,
            "nmf_tol": self.nmf_tol,
            "nmf_init_fill": self.nmf_init_fill,
            "correlate_raw_w": self.correlate_raw_w,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PipelineConfig":
        known = {f: d[f] for f in cls.__dataclass_fields__ if f in d}
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigBounds(f"unknown config fields: {sorted(unknown)}")
        cfg = cls(**known)
        cfg.validate()
        return cfg


@dataclass(frozen=True)
class Dataset:
    catalog: StationCatalog
    tensor: SpatioTemporalTensor
    pollutants: list[AuxiliarySeries]
    meteorology: list[AuxiliarySeries]
    grid: GridSensorSet


def validate_config_against(config: PipelineConfig, dataset: Dataset) -> None:
    """Check data-dependent bounds before launching a run."""
    config.validate()
    t, n, d = dataset.tensor.shape
    if config.p > min(t * n, d):
        raise ConfigBounds(f"p={config.p} exceeds min(t*n, d) = {min(t * n, d)}")
    if config.k > n:
        raise ConfigBounds(f"k={config.k} exceeds station count {n}")
    if config.dr_method == "umap":
        if n < 3:
            raise ConfigBounds("umap needs at least 3 stations")
        nn = config.n_neighbors if config.n_neighbors is not None else min(15, n - 1)
        if not (2 <= nn < n):
            raise ConfigBounds(f"n_neighbors={nn} must satisfy 2 <= nn < n={n}")


def load_dataset(data_dir: str | Path) -> Dataset:
    """Load the six-file CSV layout from a directory."""
    d = Path(data_dir)
    catalog = ingest.load_stations(d / "stations.csv")
    tensor = ingest.load_species(d / "species.csv", catalog)
    pollutants = ingest.load_auxiliary(d / "pollutants.csv", "pollutant")
    meteorology = ingest.load_auxiliary(d / "meteorology.csv", "meteorology")
    grid = ingest.load_grid(d / "grid_sensors.csv", d / "grid_readings.csv")
    return Dataset(
        catalog=catalog,
        tensor=tensor,
        pollutants=pollutants,
        meteorology=meteorology,
        grid=grid,
    )


@dataclass(frozen=True)
class PipelineResult:
    config: PipelineConfig
    dataset: Dataset
    tensor: SpatioTemporalTensor  # imputed
    factorization: fz.FactorizationResult
    contributions: ContributionTensor
    embedding: StationEmbedding
    characteristics: list[cc.ClusterCharacteristic]
    correlations: an.CorrelationTable
    transitions: an.TransitionSeries
    dominance: dict[tuple[str, str], list[tuple[int, int]]]
    grid_slices: dict[datetime, an.GridSlice]
    timings: dict[str, float] = field(compare=False)

    @property
    def source_ids(self) -> list[str]:
        return source_labels(self.config.p)


def _pm25_with_gaps(
    pollutants: Sequence[AuxiliarySeries], station_ids: Sequence[str]
) -> dict[str, list[tuple[datetime, float | None]]]:
    """Hourly PM2.5 per station over the series' full stamp range, gaps kept."""
    series = next((s for s in pollutants if s.name.lower() == "pm25"), None)
    if series is None or not series.samples:
        return {}
    stamps = sorted({ts for _, ts in series.samples})
    return {
        sid: [(ts, series.samples.get((sid, ts))) for ts in stamps]
        for sid in station_ids
    }


def run_pipeline(dataset: Dataset, config: PipelineConfig) -> PipelineResult:
    config.validate()
    timings: dict[str, float] = {}

    def timed(name):
        class _T:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                timings[name] = time.perf_counter() - self.t0

        return _T()

    with timed("impute"):
        tensor = impute(dataset.tensor, config.impute_policy)  # type: ignore[arg-type]
    t, n, d = tensor.shape

    with timed("nmf"):
        unfolded = unfold(tensor)
        fact = fz.run_nmf(
            unfolded,
            config.p,
            seed=config.seed,
            max_iter=config.nmf_max_iter,
            tol=config.nmf_tol,
            init_fill=config.nmf_init_fill,  # type: ignore[arg-type]
        )

    with timed("multidr"):
        contributions = ContributionTensor(
            fact.W_hat.values.reshape(t, n, config.p)
        )
        Y, pc1 = multidr.first_step_pca(contributions)
        Z = multidr.second_step_embed(
            Y,
            method=config.dr_method,  # type: ignore[arg-type]
            params=UmapParams(
                n_neighbors=config.n_neighbors,
                min_dist=config.min_dist,
                n_epochs=config.n_epochs,
            ),
            seed=config.seed,
        )
        labels = multidr.cluster_stations(Z, config.k, seed=config.seed)
        embedding = StationEmbedding(
            Y=Y, Z=Z, pc1_explained=pc1, cluster_labels=labels, k=config.k, seed=config.seed
        )

    with timed("contrastive"):
        if len(set(labels)) >= 2:
            characteristics = cc.characterize_all(Y, labels, config.alpha_mode)
        else:
            characteristics = []

    with timed("analytics"):
        aligned = [
            ingest.align_to_tensor_cadence(s, tensor.time_index)
            for s in (*dataset.pollutants, *dataset.meteorology)
        ]
        corr_basis = contributions
        if config.correlate_raw_w:
            corr_basis = ContributionTensor(fact.W.reshape(t, n, config.p))
        correlations = an.correlate_sources(
            corr_basis, tensor.station_index, aligned, tensor.time_index
        )
        pm25 = _pm25_with_gaps(dataset.pollutants, tensor.station_index)
        transitions = an.cluster_transitions(
            contributions, labels, tensor.station_index, pm25=pm25
        )
        src_ids = source_labels(config.p)
        dominance = {
            (sid, src_ids[s]): an.dominance_periods(contributions, j, s)
            for j, sid in enumerate(tensor.station_index)
            for s in range(config.p)
        }
        grid_slices = {
            ts: an.grid_pm25(dataset.grid, config.cell_deg, ts)
            for ts in dataset.grid.timestamps()
        }

    return PipelineResult(
        config=config,
        dataset=dataset,
        tensor=tensor,
        factorization=fact,
        contributions=contributions,
        embedding=embedding,
        characteristics=characteristics,
        correlations=correlations,
        transitions=transitions,
        dominance=dominance,
        grid_slices=grid_slices,
        timings=timings,
    )


# -------- view payloads --------

def _nan_to_none(x: float) -> float | None:
    return None if not np.isfinite(x) else float(x)


def _envelope(result: PipelineResult) -> dict[str, Any]:
    return {"seed": result.config.seed, "config": result.config.to_dict()}


def payload_sources(result: PipelineResult) -> dict[str, Any]:
    """View (a): source compositions, species ranking, correlations."""
    fact = result.factorization
    features = list(result.tensor.feature_index)
    corr = result.correlations
    return {
        **_envelope(result),
        "features": features,
        "sources": [
            {
                "id": label,
                "concentrations": [float(x) for x in fact.H_hat.values[i]],
                "top_species": list(
                    fz.interpret_row(fact.H_hat, i, features).top_species
                ),
            }
            for i, label in enumerate(fact.labels)
        ],
        "ranking": fz.rank_species(fact.H_hat, features, top=15),
        "ranking_full": fz.rank_species(fact.H_hat, features, top=None),
        "explained_variance_ratio": fact.explained_variance_ratio,
        "objective": fact.objective_trace[-1],
        "iterations": len(fact.objective_trace) - 1,
        "correlations": {
            "rows": list(corr.rows),
            "cols": list(corr.cols),
            "r": [[_nan_to_none(x) for x in row] for row in corr.r],
            "n_pairs": [[int(x) for x in row] for row in corr.n_pairs],
        },
    }


def payload_similarity(result: PipelineResult) -> dict[str, Any]:
    """View (b): 2-D station embedding with cluster labels."""
    emb = result.embedding
    return {
        **_envelope(result),
        "stations": list(result.tensor.station_index),
        "Z": [[float(x), float(y)] for x, y in emb.Z],
        "Y": [[float(x) for x in row] for row in emb.Y],
        "labels": list(emb.cluster_labels),
        "pc1_explained": float(emb.pc1_explained),
        "k": emb.k,
    }


def payload_characteristics(result: PipelineResult) -> dict[str, Any]:
    """View (c): per-cluster contrastive loading vectors over sources."""
    return {
        **_envelope(result),
        "sources": result.source_ids,
        "clusters": [
            {
                "cluster": ch.cluster_id,
                "loadings": [float(x) for x in ch.loadings],
                "alpha": float(ch.alpha),
                "eigengap": float(ch.eigengap),
                "reliable": ch.reliable,
            }
            for ch in result.characteristics
        ],
    }


def payload_map(result: PipelineResult, ts: datetime) -> dict[str, Any]:
    """View (d): station points with labels plus the grid slice at ts."""
    pm25 = result.transitions.pm25
    station_pm: dict[str, float | None] = {}
    for sid, series in pm25.items():
        station_pm[sid] = next((v for t_, v in series if t_ == ts), None)
    gslice = result.grid_slices.get(ts)
    if gslice is None:
        gslice = an.grid_pm25(result.dataset.grid, result.config.cell_deg, ts)
    labels = result.embedding.cluster_labels
    return {
        **_envelope(result),
        "timestamp": ts,
        "stations": [
            {
                "id": e.station_id,
                "name": e.name,
                "lat": e.lat,
                "lon": e.lon,
                "cluster": labels[j],
                "pm25": station_pm.get(e.station_id),
            }
            for j, e in enumerate(result.dataset.catalog.entries)
        ],
        "grid": {
            "cell_deg": result.config.cell_deg,
            "cells": [
                {
                    "row": c.row,
                    "col": c.col,
                    "lat_min": c.lat_min,
                    "lat_max": c.lat_max,
                    "lon_min": c.lon_min,
                    "lon_max": c.lon_max,
                    "mean": c.mean,
                    "count": c.count,
                }
                for c in gslice.cells
            ],
        },
    }


def payload_transitions_sources(result: PipelineResult) -> dict[str, Any]:
    """View (e): per-cluster mean contribution series for each source."""
    src_ids = result.source_ids
    clusters = sorted({c for c, _ in result.transitions.cluster_series})
    return {
        **_envelope(result),
        "timestamps": list(result.tensor.time_index),
        "sources": src_ids,
        "clusters": [
            {
                "cluster": c,
                "series": {
                    src_ids[s]: [
                        float(x) for x in result.transitions.cluster_series[(c, s)]
                    ]
                    for s in range(result.config.p)
                },
            }
            for c in clusters
        ],
    }


def payload_transitions_pm25(
    result: PipelineResult,
    stations: Sequence[str] | None = None,
    source: str | None = None,
    ts_from: datetime | None = None,
    ts_to: datetime | None = None,
) -> dict[str, Any]:
    """View (f): PM2.5 lines with gaps, one source's contributions, and the
    dominance intervals for that source, clipped to [ts_from, ts_to]."""
    src_ids = result.source_ids
    source = source or src_ids[0]
    if source not in src_ids:
        raise ConfigBounds(f"unknown source {source!r}")
    s = src_ids.index(source)
    all_stations = list(result.tensor.station_index)
    stations = list(stations) if stations else all_stations
    for sid in stations:
        if sid not in all_stations:
            raise ConfigBounds(f"unknown station {sid!r}")

    def in_range(ts: datetime) -> bool:
        if ts_from is not None and ts < ts_from:
            return False
        if ts_to is not None and ts > ts_to:
            return False
        return True

    pm25 = result.transitions.pm25
    pm_out = {}
    hourly_ts: list[datetime] = []
    for sid in stations:
        series = pm25.get(sid, [])
        clipped = [(t_, v) for t_, v in series if in_range(t_)]
        if not hourly_ts and clipped:
            hourly_ts = [t_ for t_, _ in clipped]
        pm_out[sid] = [v for _, v in clipped]

    tensor_ts = [
        (i, t_) for i, t_ in enumerate(result.tensor.time_index) if in_range(t_)
    ]
    kept = [i for i, _ in tensor_ts]
    contributions = {
        sid: [
            float(result.transitions.station_series[(sid, s)][i]) for i in kept
        ]
        for sid in stations
    }
    dominance = {}
    for sid in stations:
        intervals = result.dominance[(sid, source)]
        clipped_iv = []
        for a, b in intervals:
            lo = max(a, kept[0]) if kept else a
            hi = min(b, kept[-1]) if kept else b
            if kept and lo <= hi:
                clipped_iv.append(
                    [result.tensor.time_index[lo], result.tensor.time_index[hi]]
                )
        dominance[sid] = clipped_iv
    return {
        **_envelope(result),
        "source": source,
        "stations": stations,
        "timestamps": hourly_ts,
        "pm25": pm_out,
        "tensor_timestamps": [t_ for _, t_ in tensor_ts],
        "contributions": contributions,
        "dominance": dominance,
    }

"""Batch report rendering: a plain-text diagnostics file plus static
figure versions of the six linked views, written next to the JSON exports.

Figure bytes stay reproducible for a fixed seed: the Agg backend is
forced, nothing time-dependent is drawn, and the PNG Software chunk is
pinned.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import jsonio
from .factorization import rank_species
from .ingest import format_timestamp
from .pipeline import PipelineResult

TEAL = "#0f8f8f"
PINK = "#e05f9e"
PNG_META = {"Software": "aerofactor"}
CLUSTER_CMAP = plt.get_cmap("tab10")


def _save(fig, path: Path) -> None:
    fig.savefig(path, metadata=PNG_META, dpi=110)
    plt.close(fig)


def write_report(result: PipelineResult, path: Path) -> None:
    fact = result.factorization
    cfg = result.config
    t, n, d = result.tensor.shape
    lines = ["aerofactor run report", "=" * 21, ""]
    lines.append(f"config: {jsonio.dumps(cfg.to_dict())}")
    lines.append(f"tensor: t={t} stations={n} features={d}")
    lines.append(
        f"time range: {format_timestamp(result.tensor.time_index[0])} .. "
        f"{format_timestamp(result.tensor.time_index[-1])}"
    )
    lines.append("")

    rep = result.tensor.imputation
    if rep is not None:
        lines.append(f"imputation: policy={rep.policy} cells_filled={rep.total}")
        worst = sorted(rep.counts.items(), key=lambda kv: (-kv[1], kv[0]))[:10]
        for (sid, feat), c in worst:
            lines.append(f"  {sid}/{feat}: {c}")
    lines.append("")
    lines.append(
        f"nmf: p={cfg.p} iterations={len(fact.objective_trace) - 1} "
        f"objective={fact.objective_trace[-1]:.6g} "
        f"explained_variance_ratio={fact.explained_variance_ratio:.6g}"
    )
    lines.append(
        f"species ranking (top 15): "
        + ", ".join(rank_species(fact.H_hat, list(result.tensor.feature_index), top=15))
    )
    lines.append("")
    emb = result.embedding
    lines.append(
        f"multidr: dr_method={cfg.dr_method} pc1_explained={emb.pc1_explained:.6g}"
    )
    sizes: dict[int, int] = {}
    for lab in emb.cluster_labels:
        sizes[lab] = sizes.get(lab, 0) + 1
    lines.append(
        "clusters: "
        + ", ".join(f"{c}: {sizes[c]} stations" for c in sorted(sizes))
    )
    for ch in result.characteristics:
        top = int(np.argmax(np.abs(ch.loadings)))
        lines.append(
            f"  cluster {ch.cluster_id}: alpha={ch.alpha:.6g} "
            f"eigengap={ch.eigengap:.6g} top|loading|={result.source_ids[top]}"
            + ("" if ch.reliable else " (unreliable)")
        )
    lines.append("")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def render_figures(result: PipelineResult, fig_dir: Path) -> list[Path]:
    fig_dir.mkdir(parents=True, exist_ok=True)
    written = []
    written.append(_fig_sources(result, fig_dir / "sources.png"))
    written.append(_fig_similarity(result, fig_dir / "similarity.png"))
    if result.characteristics:
        written.append(_fig_characteristics(result, fig_dir / "characteristics.png"))
    written.append(_fig_transitions(result, fig_dir / "transitions_sources.png"))
    written.append(_fig_map(result, fig_dir / "map.png"))
    if result.transitions.pm25:
        written.append(_fig_pm25(result, fig_dir / "pm25_transitions.png"))
    return written


def _fig_sources(result: PipelineResult, path: Path) -> Path:
    fact = result.factorization
    features = list(result.tensor.feature_index)
    top = rank_species(fact.H_hat, features, top=15)
    cols = [features.index(f) for f in top]
    H = fact.H_hat.values[:, cols]
    corr = result.correlations

    fig, (ax1, ax2) = plt.subplots(
        1, 2, figsize=(12, 0.6 + 0.45 * fact.p), width_ratios=[2, 1]
    )
    for ax, M, names, title, signed in (
        (ax1, H, top, "source composition (top species)", False),
        (ax2, corr.r, list(corr.cols), "correlation with measures", True),
    ):
        p, m = M.shape
        vmax = np.nanmax(np.abs(M)) if np.isfinite(M).any() else 1.0
        for i in range(p):
            for j in range(m):
                v = M[i, j]
                if not np.isfinite(v) or v == 0:
                    continue
                size = 0.9 * np.sqrt(abs(v) / vmax)
                color = (TEAL if v >= 0 else PINK) if signed else "#40618f"
                ax.add_patch(
                    plt.Rectangle(
                        (j - size / 2, i - size / 2), size, size, color=color
                    )
                )
        ax.set_xlim(-0.7, m - 0.3)
        ax.set_ylim(p - 0.3, -0.7)
        ax.set_xticks(range(m), names, rotation=90, fontsize=7)
        ax.set_yticks(range(p), result.source_ids)
        ax.set_title(title, fontsize=9)
        ax.set_aspect("equal")
    fig.tight_layout()
    _save(fig, path)
    return path


def _fig_similarity(result: PipelineResult, path: Path) -> Path:
    emb = result.embedding
    fig, ax = plt.subplots(figsize=(5, 4.5))
    for j, sid in enumerate(result.tensor.station_index):
        c = CLUSTER_CMAP(emb.cluster_labels[j] % 10)
        ax.scatter(emb.Z[j, 0], emb.Z[j, 1], color=c, s=60, zorder=3)
        ax.annotate(sid, emb.Z[j], fontsize=7, xytext=(4, 4), textcoords="offset points")
    ax.set_title(f"station similarity ({result.config.dr_method})", fontsize=9)
    fig.tight_layout()
    _save(fig, path)
    return path


def _fig_characteristics(result: PipelineResult, path: Path) -> Path:
    p = result.config.p
    fig, ax = plt.subplots(figsize=(1.2 + 0.8 * p, 3.5))
    width = 0.8 / max(len(result.characteristics), 1)
    for ci, ch in enumerate(result.characteristics):
        xs = np.arange(p) + ci * width - 0.4 + width / 2
        ax.bar(
            xs,
            ch.loadings,
            width=width,
            color=CLUSTER_CMAP(ch.cluster_id % 10),
            label=f"cluster {ch.cluster_id}",
        )
    ax.axhline(0, color="black", lw=0.6)
    ax.set_xticks(range(p), result.source_ids)
    ax.set_title("cluster characteristics (loadings per source)", fontsize=9)
    ax.legend(fontsize=7)
    fig.tight_layout()
    _save(fig, path)
    return path


def _fig_transitions(result: PipelineResult, path: Path) -> Path:
    p = result.config.p
    clusters = sorted({c for c, _ in result.transitions.cluster_series})
    fig, axes = plt.subplots(p, 1, figsize=(8, 1.2 * p), sharex=True, squeeze=False)
    x = np.arange(len(result.tensor.time_index))
    for s in range(p):
        ax = axes[s, 0]
        for c in clusters:
            ax.plot(
                x,
                result.transitions.cluster_series[(c, s)],
                color=CLUSTER_CMAP(c % 10),
                lw=1.0,
            )
        ax.set_ylabel(result.source_ids[s], rotation=0, labelpad=12, fontsize=8)
    axes[0, 0].set_title("per-cluster mean contribution by source", fontsize=9)
    fig.tight_layout()
    _save(fig, path)
    return path


def _fig_map(result: PipelineResult, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 5))
    slices = result.grid_slices
    ts = max(slices) if slices else None
    if ts is not None:
        cells = slices[ts].cells
        if cells:
            vmax = max(c.mean for c in cells) or 1.0
            for c in cells:
                ax.add_patch(
                    plt.Rectangle(
                        (c.lon_min, c.lat_min),
                        c.lon_max - c.lon_min,
                        c.lat_max - c.lat_min,
                        color=plt.get_cmap("YlOrRd")(min(c.mean / vmax, 1.0)),
                        alpha=0.7,
                        zorder=1,
                    )
                )
    labels = result.embedding.cluster_labels
    for j, e in enumerate(result.dataset.catalog.entries):
        ax.scatter(e.lon, e.lat, color=CLUSTER_CMAP(labels[j] % 10), s=50, zorder=3,
                   edgecolors="black", linewidths=0.5)
        ax.annotate(e.station_id, (e.lon, e.lat), fontsize=6,
                    xytext=(3, 3), textcoords="offset points")
    ax.set_xlabel("lon", fontsize=8)
    ax.set_ylabel("lat", fontsize=8)
    title = "stations and PM2.5 grid"
    if ts is not None:
        title += f" at {format_timestamp(ts)}"
    ax.set_title(title, fontsize=9)
    ax.autoscale_view()
    fig.tight_layout()
    _save(fig, path)
    return path


def _fig_pm25(result: PipelineResult, path: Path) -> Path:
    pm25 = result.transitions.pm25
    src = result.source_ids[0]
    fig, ax = plt.subplots(figsize=(9, 3.5))
    ax2 = ax.twinx()
    for sid, series in pm25.items():
        xs = np.arange(len(series))
        ys = np.array([v if v is not None else np.nan for _, v in series])
        ax.plot(xs, ys, color="0.6", lw=0.7)  # NaN breaks keep sensor gaps visible
    tindex = {t_: i for i, t_ in enumerate(result.tensor.time_index)}
    if pm25:
        stamps = [t_ for t_, _ in next(iter(pm25.values()))]
        hour_of = {t_: i for i, t_ in enumerate(stamps)}
        for sid in result.tensor.station_index:
            contr = result.transitions.station_series[(sid, 0)]
            xs = [hour_of.get(t_) for t_ in result.tensor.time_index]
            keep = [(x, c) for x, c in zip(xs, contr) if x is not None]
            if keep:
                ax2.plot(*zip(*keep), color="black", lw=0.9)
            for a, b in result.dominance[(sid, src)]:
                ta, tb = result.tensor.time_index[a], result.tensor.time_index[b]
                if ta in hour_of and tb in hour_of:
                    seg = [(hour_of[t_], c) for t_, c in zip(result.tensor.time_index, contr)
                           if tindex[t_] >= a and tindex[t_] <= b]
                    if seg:
                        ax2.fill_between(*zip(*seg), 0, color="black", alpha=0.15)
    ax.set_title(f"PM2.5 (gray) and source {src} contribution (black)", fontsize=9)
    fig.tight_layout()
    _save(fig, path)
    return path

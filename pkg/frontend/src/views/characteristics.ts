import type { Payload } from "../api.js";
import { clusterColor, htmlEl, svgEl } from "../render.js";
import type { Store, ViewState } from "../state.js";
import type { CharacteristicsPayload } from "../types.js";

const W = 340;
const H = 220;
const PAD = 24;

/**
 * Station group characteristic view (c): overlapping per-cluster bar
 * charts of contrastive loadings per source. Hovering a cluster id in
 * the legend dims the other clusters' bars.
 */
export class CharacteristicsView {
  readonly el: HTMLElement;

  constructor(
    private payload: Payload<CharacteristicsPayload>,
    private store: Store,
  ) {
    this.el = htmlEl("div", "af-view af-characteristics");
  }

  render(state: ViewState): void {
    const data = this.payload.data;
    this.el.replaceChildren();
    this.el.appendChild(htmlEl("div", "af-view-title", "group characteristics"));
    const svg = svgEl("svg", { width: W, height: H, class: "af-bars" });

    const p = data.sources.length;
    const groupW = (W - 2 * PAD) / Math.max(p, 1);
    let maxAbs = 1e-12;
    for (const c of data.clusters)
      for (const v of c.loadings) maxAbs = Math.max(maxAbs, Math.abs(v));
    const mid = H / 2;
    const barW = (groupW * 0.85) / Math.max(data.clusters.length, 1);

    svg.appendChild(
      svgEl("line", { x1: PAD, x2: W - PAD, y1: mid, y2: mid, stroke: "#555" }),
    );
    data.sources.forEach((label, s) => {
      const text = svgEl("text", {
        x: PAD + s * groupW + groupW / 2,
        y: H - 4,
        "text-anchor": "middle",
        class: "af-col-label",
      });
      text.textContent = label;
      svg.appendChild(text);
    });

    data.clusters.forEach((cluster, ci) => {
      const dim =
        state.highlightedCluster !== null &&
        state.highlightedCluster !== cluster.cluster;
      cluster.loadings.forEach((value, s) => {
        const h = (Math.abs(value) / maxAbs) * (mid - PAD);
        svg.appendChild(
          svgEl("rect", {
            x: PAD + s * groupW + ci * barW + groupW * 0.075,
            y: value >= 0 ? mid - h : mid,
            width: barW,
            height: h,
            fill: clusterColor(cluster.cluster),
            opacity: dim ? 0.12 : 0.8,
            class: "af-loading-bar",
            "data-cluster": cluster.cluster,
            "data-source": data.sources[s],
          }),
        );
      });
    });
    this.el.appendChild(svg);

    const legend = htmlEl("div", "af-legend");
    for (const cluster of data.clusters) {
      const item = htmlEl(
        "span",
        "af-legend-item",
        `cluster ${cluster.cluster}${cluster.reliable ? "" : " (unreliable)"}`,
      );
      item.style.color = clusterColor(cluster.cluster);
      item.dataset.cluster = String(cluster.cluster);
      item.addEventListener("mouseenter", () =>
        this.store.update({ highlightedCluster: cluster.cluster }),
      );
      item.addEventListener("mouseleave", () =>
        this.store.update({ highlightedCluster: null }),
      );
      legend.appendChild(item);
    }
    this.el.appendChild(legend);
  }
}

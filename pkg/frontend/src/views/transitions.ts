import type { Payload } from "../api.js";
import { clusterColor, htmlEl, linearScale, svgEl } from "../render.js";
import type { Store, ViewState } from "../state.js";
import type { TransitionsSourcesPayload } from "../types.js";

const W = 420;
const ROW_H = 58;
const PAD = 30;

/**
 * Pollution source contribution transition view (e): a small multiple
 * with one row per source; each row draws the per-cluster mean
 * contribution lines over the tensor timestamps.
 */
export class TransitionsView {
  readonly el: HTMLElement;

  constructor(
    private payload: Payload<TransitionsSourcesPayload>,
    private store: Store,
  ) {
    this.el = htmlEl("div", "af-view af-transitions");
  }

  render(state: ViewState): void {
    const data = this.payload.data;
    this.el.replaceChildren();
    this.el.appendChild(htmlEl("div", "af-view-title", "source contribution transitions"));
    const t = data.timestamps.length;
    const sx = linearScale(0, Math.max(t - 1, 1), PAD, W - 8);

    data.sources.forEach((source) => {
      const row = svgEl("svg", {
        width: W,
        height: ROW_H,
        class: "af-transition-row",
        "data-source": source,
      });
      const label = svgEl("text", {
        x: 4,
        y: ROW_H / 2 + 4,
        class: `af-source-label${state.selectedSource === source ? " selected" : ""}`,
      });
      label.textContent = source;
      label.addEventListener("click", () =>
        this.store.update({ selectedSource: source }),
      );
      row.appendChild(label);

      let max = 1e-12;
      for (const c of data.clusters)
        for (const v of c.series[source]) max = Math.max(max, v);
      const sy = linearScale(0, max, ROW_H - 8, 6);

      for (const cluster of data.clusters) {
        const dim =
          state.highlightedCluster !== null &&
          state.highlightedCluster !== cluster.cluster;
        const points = cluster.series[source]
          .map((v, i) => `${sx(i)},${sy(v)}`)
          .join(" ");
        row.appendChild(
          svgEl("polyline", {
            points,
            fill: "none",
            stroke: clusterColor(cluster.cluster),
            "stroke-width": 1.4,
            opacity: dim ? 0.12 : 0.9,
            class: "af-cluster-line",
            "data-cluster": cluster.cluster,
          }),
        );
      }
      this.el.appendChild(row);
    });
  }
}

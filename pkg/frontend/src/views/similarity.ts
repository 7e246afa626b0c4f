import type { Payload } from "../api.js";
import { clusterColor, extent, htmlEl, linearScale, svgEl } from "../render.js";
import type { Store, ViewState } from "../state.js";
import type { SimilarityPayload } from "../types.js";

const W = 320;
const H = 280;
const PAD = 24;

/**
 * Station similarity view (b): the 2-D embedding, one point per station
 * colored by cluster, linked to the map and PM2.5 selections.
 */
export class SimilarityView {
  readonly el: HTMLElement;

  constructor(
    private payload: Payload<SimilarityPayload>,
    private store: Store,
  ) {
    this.el = htmlEl("div", "af-view af-similarity");
  }

  render(state: ViewState): void {
    const data = this.payload.data;
    this.el.replaceChildren();
    this.el.appendChild(htmlEl("div", "af-view-title", "station similarity"));
    const svg = svgEl("svg", { width: W, height: H, class: "af-scatter" });

    const sx = linearScale(...extent(data.Z.map((z) => z[0])), PAD, W - PAD);
    const sy = linearScale(...extent(data.Z.map((z) => z[1])), H - PAD, PAD);

    data.stations.forEach((id, j) => {
      const cluster = data.labels[j];
      const dim =
        state.highlightedCluster !== null && state.highlightedCluster !== cluster;
      const selected = state.selectedStations.includes(id);
      const g = svgEl("g", {
        class: `af-station${selected ? " selected" : ""}${dim ? " dimmed" : ""}`,
        "data-station-id": id,
        opacity: dim ? 0.25 : 1,
      });
      g.appendChild(
        svgEl("circle", {
          cx: sx(data.Z[j][0]),
          cy: sy(data.Z[j][1]),
          r: selected ? 8 : 6,
          fill: clusterColor(cluster),
          stroke: selected ? "#111" : "none",
          "stroke-width": selected ? 2.5 : 0,
        }),
      );
      const label = svgEl("text", {
        x: sx(data.Z[j][0]) + 8,
        y: sy(data.Z[j][1]) - 6,
        class: "af-point-label",
      });
      label.textContent = id;
      g.appendChild(label);
      g.addEventListener("click", () => this.store.toggleStation(id));
      svg.appendChild(g);
    });
    this.el.appendChild(svg);
  }
}

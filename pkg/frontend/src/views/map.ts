import type { Payload } from "../api.js";
import {
  clusterColor,
  convexHull,
  extent,
  heatColor,
  htmlEl,
  linearScale,
  svgEl,
} from "../render.js";
import type { Store, ViewState } from "../state.js";
import type { MapPayload } from "../types.js";

const W = 360;
const H = 320;
const PAD = 26;

/**
 * Geospatial map view (d): station points with convex-hull cluster
 * blobs and the PM2.5 grid slice at the selected timestamp, colored on
 * a yellow-red ramp. Clicking a station links the selection everywhere;
 * hovering a cluster id in the legend dims the other clusters.
 */
export class MapView {
  readonly el: HTMLElement;

  constructor(
    private payload: Payload<MapPayload>,
    private store: Store,
  ) {
    this.el = htmlEl("div", "af-view af-map");
  }

  setData(payload: Payload<MapPayload>): void {
    this.payload = payload;
  }

  render(state: ViewState): void {
    const data = this.payload.data;
    this.el.replaceChildren();
    const title = htmlEl("div", "af-view-title", "geospatial map");
    title.appendChild(htmlEl("span", "af-map-ts", data.timestamp));
    this.el.appendChild(title);

    const svg = svgEl("svg", { width: W, height: H, class: "af-mapsvg" });
    const lats = data.stations.map((s) => s.lat);
    const lons = data.stations.map((s) => s.lon);
    for (const c of data.grid.cells) {
      lats.push(c.lat_min, c.lat_max);
      lons.push(c.lon_min, c.lon_max);
    }
    const sx = linearScale(...extent(lons), PAD, W - PAD);
    const sy = linearScale(...extent(lats), H - PAD, PAD);

    const maxMean = Math.max(1e-12, ...data.grid.cells.map((c) => c.mean));
    for (const cell of data.grid.cells) {
      svg.appendChild(
        svgEl("rect", {
          x: Math.min(sx(cell.lon_min), sx(cell.lon_max)),
          y: Math.min(sy(cell.lat_min), sy(cell.lat_max)),
          width: Math.abs(sx(cell.lon_max) - sx(cell.lon_min)),
          height: Math.abs(sy(cell.lat_max) - sy(cell.lat_min)),
          fill: heatColor(cell.mean / maxMean),
          opacity: 0.7,
          class: "af-grid-cell",
          "data-cell": `${cell.row},${cell.col}`,
        }),
      );
    }

    const clusters = [...new Set(data.stations.map((s) => s.cluster))].sort(
      (a, b) => a - b,
    );
    for (const cluster of clusters) {
      const pts: [number, number][] = data.stations
        .filter((s) => s.cluster === cluster)
        .map((s) => [sx(s.lon), sy(s.lat)]);
      const dim =
        state.highlightedCluster !== null && state.highlightedCluster !== cluster;
      const hull = convexHull(pts);
      const d =
        hull.map((p, i) => `${i ? "L" : "M"}${p[0]},${p[1]}`).join(" ") +
        (hull.length > 2 ? " Z" : "");
      svg.appendChild(
        svgEl("path", {
          d: d || `M0,0`,
          class: "af-cluster-blob",
          "data-cluster": cluster,
          stroke: clusterColor(cluster),
          "stroke-width": 26,
          "stroke-linejoin": "round",
          "stroke-linecap": "round",
          fill: clusterColor(cluster),
          opacity: dim ? 0.06 : 0.22,
        }),
      );
    }

    for (const station of data.stations) {
      const dim =
        state.highlightedCluster !== null &&
        state.highlightedCluster !== station.cluster;
      const selected = state.selectedStations.includes(station.id);
      const g = svgEl("g", {
        class: `af-station${selected ? " selected" : ""}${dim ? " dimmed" : ""}`,
        "data-station-id": station.id,
        opacity: dim ? 0.3 : 1,
      });
      g.appendChild(
        svgEl("circle", {
          cx: sx(station.lon),
          cy: sy(station.lat),
          r: selected ? 8 : 6,
          fill:
            station.pm25 === null ? "#bbb" : heatColor(station.pm25 / maxMean),
          stroke: selected ? "#111" : clusterColor(station.cluster),
          "stroke-width": selected ? 3 : 2,
        }),
      );
      const label = svgEl("text", {
        x: sx(station.lon) + 8,
        y: sy(station.lat) - 7,
        class: "af-point-label",
      });
      label.textContent = station.id;
      g.appendChild(label);
      g.addEventListener("click", () => this.store.toggleStation(station.id));
      svg.appendChild(g);
    }
    this.el.appendChild(svg);

    const legend = htmlEl("div", "af-legend");
    for (const cluster of clusters) {
      const item = htmlEl("span", "af-legend-item", `cluster ${cluster}`);
      item.style.color = clusterColor(cluster);
      item.dataset.cluster = String(cluster);
      item.addEventListener("mouseenter", () =>
        this.store.update({ highlightedCluster: cluster }),
      );
      item.addEventListener("mouseleave", () =>
        this.store.update({ highlightedCluster: null }),
      );
      legend.appendChild(item);
    }
    this.el.appendChild(legend);
  }
}

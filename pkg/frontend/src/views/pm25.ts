import type { Payload } from "../api.js";
import { htmlEl, linearScale, svgEl } from "../render.js";
import type { Store, ViewState } from "../state.js";
import type { TransitionsPm25Payload } from "../types.js";

const W = 460;
const H = 220;
const PAD = 34;
const BRUSH_H = 26;

/**
 * Air pollution transition view (f): gray PM2.5 lines with sensor gaps
 * preserved, a black line per station for the selected source's
 * contribution, semi-transparent fills over the dominance intervals the
 * API served (never recomputed locally), a range brush echoing the
 * zoom window, and the selected timestamp shown top-left.
 */
export class Pm25View {
  readonly el: HTMLElement;
  private dragStart: number | null = null;

  constructor(
    private payload: Payload<TransitionsPm25Payload>,
    private store: Store,
  ) {
    this.el = htmlEl("div", "af-view af-pm25");
  }

  setData(payload: Payload<TransitionsPm25Payload>): void {
    this.payload = payload;
  }

  private stationsToShow(state: ViewState): string[] {
    const available = this.payload.data.stations;
    const selected = state.selectedStations.filter((s) => available.includes(s));
    return selected.length ? selected : available;
  }

  render(state: ViewState): void {
    const data = this.payload.data;
    this.el.replaceChildren();
    const title = htmlEl("div", "af-view-title", "PM2.5 and source contribution");
    const tsLabel = htmlEl("span", "af-selected-ts", state.selectedTimestamp ?? "");
    title.prepend(tsLabel);
    this.el.appendChild(title);

    const svg = svgEl("svg", { width: W, height: H + BRUSH_H + 8, class: "af-pm25svg" });
    const stamps = data.timestamps;
    const xOf = new Map(stamps.map((ts, i) => [ts, i]));
    const sx = linearScale(0, Math.max(stamps.length - 1, 1), PAD, W - 8);

    let maxPm = 1e-12;
    for (const sid of this.stationsToShow(state)) {
      for (const v of data.pm25[sid] ?? []) if (v !== null && v > maxPm) maxPm = v;
    }
    const sy = linearScale(0, maxPm, H - 18, 8);

    let maxContrib = 1e-12;
    for (const sid of this.stationsToShow(state)) {
      for (const v of data.contributions[sid] ?? [])
        if (v > maxContrib) maxContrib = v;
    }
    const syc = linearScale(0, maxContrib, H - 18, 8);

    // gray PM2.5 polylines, broken at missing samples
    for (const sid of this.stationsToShow(state)) {
      const values = data.pm25[sid] ?? [];
      let segment: string[] = [];
      const flush = () => {
        if (segment.length > 1) {
          svg.appendChild(
            svgEl("polyline", {
              points: segment.join(" "),
              fill: "none",
              stroke: "#9a9a9a",
              "stroke-width": 1,
              class: "af-pm25-line",
              "data-station-id": sid,
            }),
          );
        }
        segment = [];
      };
      values.forEach((v, i) => {
        if (v === null) flush();
        else segment.push(`${sx(i)},${sy(v)}`);
      });
      flush();
    }

    // dominance fills straight from the API's intervals
    for (const sid of this.stationsToShow(state)) {
      const contrib = data.contributions[sid] ?? [];
      for (const [fromTs, toTs] of data.dominance[sid] ?? []) {
        const pts: string[] = [];
        data.tensor_timestamps.forEach((ts, i) => {
          if (ts >= fromTs && ts <= toTs && xOf.has(ts)) {
            pts.push(`${sx(xOf.get(ts)!)},${syc(contrib[i])}`);
          }
        });
        if (!pts.length) continue;
        const first = pts[0].split(",")[0];
        const last = pts[pts.length - 1].split(",")[0];
        const base = H - 18;
        svg.appendChild(
          svgEl("path", {
            d: `M${first},${base} L${pts.join(" L")} L${last},${base} Z`,
            fill: "#000",
            opacity: 0.16,
            class: "af-dominance-fill",
            "data-station-id": sid,
            "data-from": fromTs,
            "data-to": toTs,
          }),
        );
      }
    }

    // black contribution lines over the tensor stamps
    for (const sid of this.stationsToShow(state)) {
      const contrib = data.contributions[sid] ?? [];
      const pts = data.tensor_timestamps
        .map((ts, i) => (xOf.has(ts) ? `${sx(xOf.get(ts)!)},${syc(contrib[i])}` : null))
        .filter((p): p is string => p !== null);
      if (pts.length > 1) {
        svg.appendChild(
          svgEl("polyline", {
            points: pts.join(" "),
            fill: "none",
            stroke: "#000",
            "stroke-width": 1.3,
            class: "af-contribution-line",
            "data-station-id": sid,
            "data-source": data.source,
          }),
        );
      }
    }

    svg.appendChild(this.brush(state));
    svg.addEventListener("click", (ev) => {
      const rect = (svg as SVGSVGElement).getBoundingClientRect();
      const x = (ev as MouseEvent).clientX - rect.left;
      if (!stamps.length || rect.width === 0) return;
      const idx = Math.round(((x - PAD) / (W - 8 - PAD)) * (stamps.length - 1));
      const clamped = Math.max(0, Math.min(stamps.length - 1, idx));
      this.store.update({ selectedTimestamp: stamps[clamped] });
    });
    this.el.appendChild(svg);
  }

  /** Range track under the chart; the gray rect echoes the zoom window. */
  private brush(state: ViewState): SVGGElement {
    const [spanFrom, spanTo] = this.store.meta.span;
    const t0 = Date.parse(spanFrom);
    const t1 = Date.parse(spanTo);
    const sx = linearScale(t0, Math.max(t1, t0 + 1), PAD, W - 8);
    const g = svgEl("g", { class: "af-brush", transform: `translate(0 ${H})` });
    g.appendChild(
      svgEl("rect", {
        x: PAD,
        y: 4,
        width: W - 8 - PAD,
        height: BRUSH_H - 8,
        fill: "#eee",
        stroke: "#ccc",
        class: "af-brush-track",
      }),
    );
    const [from, to] = state.timeRange ?? this.store.meta.span;
    g.appendChild(
      svgEl("rect", {
        x: sx(Date.parse(from)),
        y: 4,
        width: Math.max(2, sx(Date.parse(to)) - sx(Date.parse(from))),
        height: BRUSH_H - 8,
        fill: "#8a8a8a",
        opacity: 0.55,
        class: "af-brush-echo",
        "data-from": from,
        "data-to": to,
      }),
    );
    const track = g.firstChild as SVGRectElement;
    track.addEventListener("mousedown", (ev) => {
      this.dragStart = (ev as MouseEvent).clientX;
    });
    track.addEventListener("mouseup", (ev) => {
      if (this.dragStart === null) return;
      const rect = track.getBoundingClientRect();
      if (rect.width === 0) {
        this.dragStart = null;
        return;
      }
      const toTime = (clientX: number) =>
        t0 + ((clientX - rect.left) / rect.width) * (t1 - t0);
      const a = new Date(Math.min(toTime(this.dragStart), toTime((ev as MouseEvent).clientX)));
      const b = new Date(Math.max(toTime(this.dragStart), toTime((ev as MouseEvent).clientX)));
      this.dragStart = null;
      const fmt = (d: Date) => d.toISOString().replace(/\.\d{3}Z$/, "Z");
      this.store.update({ timeRange: [fmt(a), fmt(b)] });
    });
    return g;
  }
}

import type { Payload } from "../api.js";
import {
  PINK,
  TEAL,
  hideTooltip,
  htmlEl,
  showTooltip,
  svgEl,
} from "../render.js";
import type { Store, ViewState } from "../state.js";
import type { SourcesPayload } from "../types.js";

const CELL = 22;
const LABEL_W = 34;
const HEADER_H = 64;

/**
 * Pollution source view (a): square-size matrix of per-source species
 * concentrations (top-15 by default, expandable) and the teal/pink
 * correlation matrix against pollutant/meteorology measures. Hover
 * shows the exact wire value.
 */
export class SourcesView {
  readonly el: HTMLElement;
  private expanded = false;

  constructor(
    private payload: Payload<SourcesPayload>,
    private store: Store,
  ) {
    this.el = htmlEl("div", "af-view af-sources");
  }

  render(state: ViewState): void {
    const data = this.payload.data;
    this.el.replaceChildren();
    const head = htmlEl("div", "af-view-title", "pollution sources");
    const toggle = htmlEl("button", "af-expand", this.expanded ? "top 15" : "all species");
    toggle.addEventListener("click", () => {
      this.expanded = !this.expanded;
      this.render(this.store.state);
    });
    head.appendChild(toggle);
    this.el.appendChild(head);

    const shown = this.expanded ? data.ranking_full : data.ranking;
    this.el.appendChild(this.compositionMatrix(shown, state));
    this.el.appendChild(this.correlationMatrix());
  }

  private matrixSvg(cols: string[], rows: string[]): SVGSVGElement {
    return svgEl("svg", {
      width: LABEL_W + cols.length * CELL,
      height: HEADER_H + rows.length * CELL,
      class: "af-matrix",
    });
  }

  private rowLabels(svg: SVGSVGElement, rows: string[], state: ViewState): void {
    rows.forEach((id, i) => {
      const label = svgEl("text", {
        x: LABEL_W - 8,
        y: HEADER_H + i * CELL + CELL / 2 + 4,
        "text-anchor": "end",
        class: `af-source-label${state.selectedSource === id ? " selected" : ""}`,
        "data-source": id,
      });
      label.textContent = id;
      label.addEventListener("click", () => this.store.update({ selectedSource: id }));
      svg.appendChild(label);
    });
  }

  private colLabels(svg: SVGSVGElement, cols: string[]): void {
    cols.forEach((name, j) => {
      const label = svgEl("text", {
        x: LABEL_W + j * CELL + CELL / 2,
        y: HEADER_H - 6,
        class: "af-col-label",
        transform: `rotate(-60 ${LABEL_W + j * CELL + CELL / 2} ${HEADER_H - 6})`,
      });
      label.textContent = name;
      svg.appendChild(label);
    });
  }

  private compositionMatrix(species: string[], state: ViewState): SVGSVGElement {
    const data = this.payload.data;
    const svg = this.matrixSvg(species, data.sources.map((s) => s.id));
    this.rowLabels(svg, data.sources.map((s) => s.id), state);
    this.colLabels(svg, species);
    let max = 0;
    for (const s of data.sources) for (const v of s.concentrations) max = Math.max(max, v);
    data.sources.forEach((source, i) => {
      species.forEach((name, j) => {
        const f = data.features.indexOf(name);
        const v = source.concentrations[f];
        if (!v) return;
        const side = CELL * 0.92 * Math.sqrt(v / (max || 1));
        const rect = svgEl("rect", {
          x: LABEL_W + j * CELL + (CELL - side) / 2,
          y: HEADER_H + i * CELL + (CELL - side) / 2,
          width: side,
          height: side,
          fill: "#40618f",
          class: "af-cell",
          "data-path": `sources/${i}/concentrations/${f}`,
        });
        this.attachTooltip(rect, `sources/${i}/concentrations/${f}`);
        svg.appendChild(rect);
      });
    });
    return svg;
  }

  private correlationMatrix(): SVGSVGElement {
    const corr = this.payload.data.correlations;
    const svg = this.matrixSvg(corr.cols, corr.rows);
    this.rowLabels(svg, corr.rows, this.store.state);
    this.colLabels(svg, corr.cols);
    corr.rows.forEach((_, i) => {
      corr.cols.forEach((__, j) => {
        const v = corr.r[i][j];
        if (v === null || v === 0) return;
        const side = CELL * 0.92 * Math.sqrt(Math.abs(v));
        const rect = svgEl("rect", {
          x: LABEL_W + j * CELL + (CELL - side) / 2,
          y: HEADER_H + i * CELL + (CELL - side) / 2,
          width: side,
          height: side,
          fill: v >= 0 ? TEAL : PINK,
          class: "af-cell af-corr-cell",
          "data-path": `correlations/r/${i}/${j}`,
        });
        this.attachTooltip(rect, `correlations/r/${i}/${j}`);
        svg.appendChild(rect);
      });
    });
    return svg;
  }

  private attachTooltip(el: SVGElement, path: string): void {
    el.addEventListener("mouseenter", (ev) => {
      showTooltip(this.payload.literal(path), (ev as MouseEvent).clientX, (ev as MouseEvent).clientY);
    });
    el.addEventListener("mouseleave", hideTooltip);
  }
}

/** Small SVG/DOM helpers and the display color scales. */

const SVG_NS = "http://www.w3.org/2000/svg";

export function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, String(v));
  return el;
}

export function htmlEl<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const el = document.createElement(tag);
  if (className) el.className = className;
  if (text) el.textContent = text;
  return el;
}

export const CLUSTER_COLORS = [
  "#2ca02c", "#1f77b4", "#9467bd", "#ff7f0e", "#8c564b",
  "#e377c2", "#17becf", "#bcbd22", "#d62728", "#7f7f7f",
];

export function clusterColor(id: number): string {
  return CLUSTER_COLORS[((id % CLUSTER_COLORS.length) + CLUSTER_COLORS.length) % CLUSTER_COLORS.length];
}

export const TEAL = "#0f8f8f";
export const PINK = "#e05f9e";

/** Yellow-to-red ramp for PM2.5 intensity in [0, 1]. */
export function heatColor(t: number): string {
  const clamped = Math.max(0, Math.min(1, t));
  const r = 255;
  const g = Math.round(237 - clamped * 197);
  const b = Math.round(160 - clamped * 122);
  return `rgb(${r},${g},${b})`;
}

export interface Scale {
  (v: number): number;
}

export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0;
  if (span === 0) return () => (r0 + r1) / 2;
  return (v: number) => r0 + ((v - d0) / span) * (r1 - r0);
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!isFinite(lo)) return [0, 1];
  return lo === hi ? [lo - 1, hi + 1] : [lo, hi];
}

/** Monotone-chain convex hull over pixel points (cluster blob outline). */
export function convexHull(points: [number, number][]): [number, number][] {
  if (points.length <= 2) return [...points];
  const pts = [...points].sort((a, b) => a[0] - b[0] || a[1] - b[1]);
  const cross = (o: number[], a: number[], b: number[]) =>
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  const lower: [number, number][] = [];
  for (const p of pts) {
    while (lower.length >= 2 && cross(lower[lower.length - 2], lower[lower.length - 1], p) <= 0)
      lower.pop();
    lower.push(p);
  }
  const upper: [number, number][] = [];
  for (const p of [...pts].reverse()) {
    while (upper.length >= 2 && cross(upper[upper.length - 2], upper[upper.length - 1], p) <= 0)
      upper.pop();
    upper.push(p);
  }
  lower.pop();
  upper.pop();
  return [...lower, ...upper];
}

let tooltipEl: HTMLDivElement | null = null;

export function tooltip(): HTMLDivElement {
  if (!tooltipEl || !document.body.contains(tooltipEl)) {
    tooltipEl = document.createElement("div");
    tooltipEl.className = "af-tooltip";
    tooltipEl.style.position = "fixed";
    tooltipEl.style.display = "none";
    tooltipEl.style.pointerEvents = "none";
    document.body.appendChild(tooltipEl);
  }
  return tooltipEl;
}

export function showTooltip(text: string, x: number, y: number): void {
  const el = tooltip();
  el.textContent = text;
  el.style.left = `${x + 12}px`;
  el.style.top = `${y + 12}px`;
  el.style.display = "block";
}

export function hideTooltip(): void {
  tooltip().style.display = "none";
}

/**
 * Shared view state with synchronous fan-out: one update notifies every
 * subscribed view before control returns, so a selection made in one
 * view lands in all linked views within a single render cycle.
 */

export interface RunMeta {
  runId: string;
  stations: string[];
  sources: string[];
  /** Full tensor span, inclusive. */
  span: [string, string];
}

export interface ViewState {
  runId: string;
  selectedTimestamp: string | null;
  timeRange: [string, string] | null;
  selectedSource: string;
  selectedStations: string[];
  highlightedCluster: number | null;
  /** Panel order for the rearrangeable layout. */
  layout: string[];
}

export const PANELS = [
  "sources",
  "similarity",
  "characteristics",
  "map",
  "transitions",
  "pm25",
] as const;

export function defaultState(meta: RunMeta): ViewState {
  return {
    runId: meta.runId,
    selectedTimestamp: null,
    timeRange: null,
    selectedSource: meta.sources[0],
    selectedStations: [],
    highlightedCluster: null,
    layout: [...PANELS],
  };
}

function clampRange(
  range: [string, string] | null,
  span: [string, string],
): [string, string] | null {
  if (!range) return null;
  let [a, b] = range;
  if (a > b) [a, b] = [b, a];
  if (a < span[0]) a = span[0];
  if (b > span[1]) b = span[1];
  return [a, b];
}

export class Store {
  private listeners: ((s: ViewState) => void)[] = [];
  state: ViewState;

  constructor(
    readonly meta: RunMeta,
    initial?: Partial<ViewState>,
  ) {
    this.state = this.sanitize({ ...defaultState(meta), ...initial });
  }

  private sanitize(s: ViewState): ViewState {
    return {
      ...s,
      runId: this.meta.runId,
      selectedSource: this.meta.sources.includes(s.selectedSource)
        ? s.selectedSource
        : this.meta.sources[0],
      selectedStations: s.selectedStations.filter((id) =>
        this.meta.stations.includes(id),
      ),
      timeRange: clampRange(s.timeRange, this.meta.span),
      layout: s.layout.filter((p) => (PANELS as readonly string[]).includes(p)),
    };
  }

  subscribe(listener: (s: ViewState) => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  update(patch: Partial<ViewState>): void {
    this.state = this.sanitize({ ...this.state, ...patch });
    for (const listener of [...this.listeners]) listener(this.state);
  }

  toggleStation(id: string): void {
    const current = this.state.selectedStations;
    this.update({
      selectedStations: current.includes(id)
        ? current.filter((s) => s !== id)
        : [...current, id],
    });
  }

  swapPanels(a: string, b: string): void {
    const layout = [...this.state.layout];
    const ia = layout.indexOf(a);
    const ib = layout.indexOf(b);
    if (ia < 0 || ib < 0) return;
    [layout[ia], layout[ib]] = [layout[ib], layout[ia]];
    this.update({ layout });
  }
}

/** Shareable-session codec: the whole ViewState round-trips via the URL hash. */
export function encodeState(s: ViewState): string {
  const params = new URLSearchParams();
  params.set("run", s.runId);
  if (s.selectedTimestamp) params.set("ts", s.selectedTimestamp);
  if (s.timeRange) params.set("range", s.timeRange.join(".."));
  params.set("source", s.selectedSource);
  if (s.selectedStations.length) params.set("stations", s.selectedStations.join(","));
  if (s.highlightedCluster !== null) params.set("cluster", String(s.highlightedCluster));
  params.set("layout", s.layout.join(","));
  return params.toString();
}

export function decodeState(hash: string, meta: RunMeta): Partial<ViewState> {
  const params = new URLSearchParams(hash.replace(/^#/, ""));
  const out: Partial<ViewState> = {};
  const ts = params.get("ts");
  if (ts) out.selectedTimestamp = ts;
  const range = params.get("range");
  if (range && range.includes("..")) {
    const [a, b] = range.split("..");
    out.timeRange = [a, b];
  }
  const source = params.get("source");
  if (source) out.selectedSource = source;
  const stations = params.get("stations");
  if (stations) out.selectedStations = stations.split(",");
  const cluster = params.get("cluster");
  if (cluster !== null && cluster !== "") out.highlightedCluster = Number(cluster);
  const layout = params.get("layout");
  if (layout) out.layout = layout.split(",");
  void meta;
  return out;
}

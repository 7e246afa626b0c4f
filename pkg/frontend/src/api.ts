import { numberLiterals } from "./jsonText.js";
import type {
  CharacteristicsPayload,
  MapPayload,
  SimilarityPayload,
  SourcesPayload,
  TransitionsPm25Payload,
  TransitionsSourcesPayload,
} from "./types.js";

/** A parsed payload plus access to the wire's exact number tokens. */
export interface Payload<T> {
  data: T;
  /** Exact literal at a JSON path such as "sources/0/concentrations/3". */
  literal(path: string): string;
}

export async function getPayload<T>(url: string): Promise<Payload<T>> {
  const resp = await fetch(url);
  if (!resp.ok) {
    throw new Error(`GET ${url} -> ${resp.status}`);
  }
  const text = await resp.text();
  const literals = numberLiterals(text);
  const data = JSON.parse(text) as T;
  return {
    data,
    literal: (path: string) => literals.get(path) ?? "",
  };
}

export interface Pm25Query {
  stations?: string[];
  source?: string;
  from?: string;
  to?: string;
}

export class ApiClient {
  constructor(
    readonly base: string,
    readonly runId: string,
  ) {}

  private url(suffix: string): string {
    return `${this.base}/runs/${this.runId}${suffix}`;
  }

  sources(): Promise<Payload<SourcesPayload>> {
    return getPayload(this.url("/sources"));
  }

  similarity(): Promise<Payload<SimilarityPayload>> {
    return getPayload(this.url("/similarity"));
  }

  characteristics(): Promise<Payload<CharacteristicsPayload>> {
    return getPayload(this.url("/characteristics"));
  }

  transitionsSources(): Promise<Payload<TransitionsSourcesPayload>> {
    return getPayload(this.url("/transitions/sources"));
  }

  map(ts: string): Promise<Payload<MapPayload>> {
    return getPayload(this.url(`/map?ts=${encodeURIComponent(ts)}`));
  }

  transitionsPm25(query: Pm25Query = {}): Promise<Payload<TransitionsPm25Payload>> {
    const params = new URLSearchParams();
    if (query.stations?.length) params.set("stations", query.stations.join(","));
    if (query.source) params.set("source", query.source);
    if (query.from) params.set("from", query.from);
    if (query.to) params.set("to", query.to);
    const qs = params.toString();
    return getPayload(this.url(`/transitions/pm25${qs ? `?${qs}` : ""}`));
  }
}

/** Payload shapes mirroring the service API (docs/api.md). */

export interface SourceEntry {
  id: string;
  concentrations: number[];
  top_species: string[];
}

export interface CorrelationBlock {
  rows: string[];
  cols: string[];
  r: (number | null)[][];
  n_pairs: number[][];
}

export interface SourcesPayload {
  seed: number;
  config: Record<string, unknown>;
  features: string[];
  sources: SourceEntry[];
  ranking: string[];
  ranking_full: string[];
  explained_variance_ratio: number;
  objective: number;
  iterations: number;
  correlations: CorrelationBlock;
}

export interface SimilarityPayload {
  seed: number;
  config: Record<string, unknown>;
  stations: string[];
  Z: [number, number][];
  Y: number[][];
  labels: number[];
  pc1_explained: number;
  k: number;
}

export interface ClusterCharacteristic {
  cluster: number;
  loadings: number[];
  alpha: number;
  eigengap: number;
  reliable: boolean;
}

export interface CharacteristicsPayload {
  seed: number;
  config: Record<string, unknown>;
  sources: string[];
  clusters: ClusterCharacteristic[];
}

export interface MapStation {
  id: string;
  name: string;
  lat: number;
  lon: number;
  cluster: number;
  pm25: number | null;
}

export interface GridCell {
  row: number;
  col: number;
  lat_min: number;
  lat_max: number;
  lon_min: number;
  lon_max: number;
  mean: number;
  count: number;
}

export interface MapPayload {
  seed: number;
  config: Record<string, unknown>;
  timestamp: string;
  stations: MapStation[];
  grid: { cell_deg: number; cells: GridCell[] };
}

export interface TransitionsSourcesPayload {
  seed: number;
  config: Record<string, unknown>;
  timestamps: string[];
  sources: string[];
  clusters: { cluster: number; series: Record<string, number[]> }[];
}

export interface TransitionsPm25Payload {
  seed: number;
  config: Record<string, unknown>;
  source: string;
  stations: string[];
  timestamps: string[];
  pm25: Record<string, (number | null)[]>;
  tensor_timestamps: string[];
  contributions: Record<string, number[]>;
  dominance: Record<string, [string, string][]>;
}

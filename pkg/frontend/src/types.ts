/** Wire formats of the artifact service. */

export interface Manifest {
  version: string;
  mode: "text" | "exemplar";
  counts: { points: number; documents: number };
  levels: number[];
  groups: string[];
  times: string[];
}

export interface Extent {
  x0: number;
  x1: number;
  y0: number;
  y1: number;
}

export interface GridDocument {
  meta: Manifest;
  extent: Extent;
  resolution: { nx: number; ny: number };
  bandwidths: Record<string, { hx: number; hy: number }>;
  thresholds: number[];
  /** Row-major (x-major) nx*ny density values. */
  overall: number[];
  group_grids: Record<string, number[]>;
  grids: Record<string, Record<string, number[]>>;
  slice_counts: Record<string, Record<string, number>>;
}

export interface TileRecord {
  ix: number;
  iy: number;
  cx: number;
  cy: number;
  count: number;
  keywords?: [string, number][];
  exemplars?: number[];
}

export interface LevelSummary {
  level: number;
  tile_width: number;
  tiles: TileRecord[];
}

export interface LabelRecord {
  x: number;
  y: number;
  level: number;
  ix: number;
  iy: number;
  keywords: [string, number][];
}

export interface SummaryDocument {
  meta: { version: string; mode: string };
  levels: LevelSummary[];
  labels: LabelRecord[];
}

export interface SearchHit {
  point_index: number;
  score: number;
  snippet: string;
}

export interface SearchResponse {
  query: string;
  limit: number;
  results: SearchHit[];
}

/** One data.ndjson row. */
export interface PointRow {
  x: number;
  y: number;
  t?: string;
  time?: string;
  g?: string;
}

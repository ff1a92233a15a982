/** Thin client for the artifact service endpoints. */
import { streamNdjson, type NdjsonStats } from "./ndjson";
import type { GridDocument, Manifest, PointRow, SearchResponse, SummaryDocument } from "./types";

export class AtlasClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`);
    if (!response.ok) {
      throw new Error(`${path}: HTTP ${response.status}`);
    }
    return (await response.json()) as T;
  }

  manifest(): Promise<Manifest> {
    return this.getJson<Manifest>("/api/manifest");
  }

  grid(): Promise<GridDocument> {
    return this.getJson<GridDocument>("/files/grid.json");
  }

  summary(): Promise<SummaryDocument> {
    return this.getJson<SummaryDocument>("/files/summary.json");
  }

  search(query: string, limit = 20): Promise<SearchResponse> {
    const params = new URLSearchParams({ q: query, limit: String(limit) });
    return this.getJson<SearchResponse>(`/api/search?${params}`);
  }

  /** Stream data.ndjson, delivering parsed point batches as they arrive. */
  async streamPoints(onBatch: (rows: PointRow[]) => void): Promise<NdjsonStats> {
    const response = await this.fetchFn(`${this.baseUrl}/files/data.ndjson`);
    if (!response.ok || response.body === null) {
      throw new Error(`/files/data.ndjson: HTTP ${response.status}`);
    }
    return streamNdjson<PointRow>(response.body, onBatch);
  }
}

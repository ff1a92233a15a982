import fs from "node:fs";
import path from "node:path";

import { describe, expect, it, vi } from "vitest";

import { AtlasClient } from "../src/api";
import { AtlasApp, type Frame } from "../src/app";
import type { PointRow, SearchResponse } from "../src/types";

const FIXTURES = path.join(import.meta.dirname, "fixtures");
const ATLAS = path.join(FIXTURES, "atlas");

const gridDoc = JSON.parse(fs.readFileSync(path.join(ATLAS, "grid.json"), "utf-8"));
const dataBytes = fs.readFileSync(path.join(ATLAS, "data.ndjson"));
const frozenSearch: SearchResponse = JSON.parse(
  fs.readFileSync(path.join(FIXTURES, "search_dialogue.json"), "utf-8"),
);

const dataRows: PointRow[] = fs
  .readFileSync(path.join(ATLAS, "data.ndjson"), "utf-8")
  .trim()
  .split("\n")
  .map((line) => JSON.parse(line) as PointRow);

interface MockOptions {
  dataStream?: () => ReadableStream<Uint8Array>;
  search?: (q: string, limit: number) => SearchResponse;
  failGrid?: boolean;
}

function mockFetch(options: MockOptions = {}, log: string[] = []): typeof fetch {
  return async (input: RequestInfo | URL): Promise<Response> => {
    const url = new URL(String(input), "http://test");
    log.push(url.pathname + url.search);
    if (url.pathname === "/api/manifest") return Response.json(gridDoc.meta);
    if (url.pathname === "/files/grid.json") {
      if (options.failGrid) return new Response("boom", { status: 500 });
      return new Response(fs.readFileSync(path.join(ATLAS, "grid.json")));
    }
    if (url.pathname === "/files/summary.json") {
      return new Response(fs.readFileSync(path.join(ATLAS, "summary.json")));
    }
    if (url.pathname === "/files/data.ndjson") {
      const body = options.dataStream
        ? options.dataStream()
        : new Response(dataBytes).body!;
      return new Response(body);
    }
    if (url.pathname === "/api/search") {
      const q = url.searchParams.get("q") ?? "";
      const limit = Number(url.searchParams.get("limit") ?? "20");
      const payload = options.search ? options.search(q, limit) : frozenSearch;
      return Response.json(payload);
    }
    return new Response("not found", { status: 404 });
  };
}

function makeApp(options: MockOptions = {}, log: string[] = []) {
  const frames: Frame[] = [];
  const app = new AtlasApp(
    new AtlasClient("", mockFetch(options, log)),
    (frame) => frames.push(frame),
    { searchLimit: 50 },
  );
  return { app, frames };
}

/** Docs matching a single-token query under last-token-prefix semantics. */
function searchOracle(token: string): Set<number> {
  const expected = new Set<number>();
  dataRows.forEach((row, i) => {
    const tokens = (row.t ?? "").toLowerCase().split(/[^\p{L}\p{N}]+/u);
    if (tokens.some((t) => t.startsWith(token))) expected.add(i);
  });
  return expected;
}

describe("artifact loading and streaming", () => {
  it("renders contours and labels before the point stream completes", async () => {
    let release!: () => void;
    const gate = new Promise<void>((resolve) => (release = resolve));
    const { app, frames } = makeApp({
      dataStream: () =>
        new ReadableStream<Uint8Array>({
          async start(controller) {
            await gate;
            controller.enqueue(dataBytes);
            controller.close();
          },
        }),
    });

    const loading = app.load();
    await vi.waitFor(() => expect(frames.length).toBeGreaterThan(0));

    // first frame: stream still open, zero points, geometry already usable
    const first = frames[0];
    expect(first.streaming).toBe(true);
    expect(first.pointsLoaded).toBe(0);
    expect(app.rings("overall").some((rings) => rings.length > 0)).toBe(true);
    expect(app.labels().length).toBeGreaterThan(0);

    release();
    await loading;
    const last = frames[frames.length - 1];
    expect(last.streaming).toBe(false);
    expect(last.pointsLoaded).toBe(gridDoc.meta.counts.points);
  });

  it("loads manifest, groups, and times from the fixture", async () => {
    const { app } = makeApp();
    await app.load();
    expect(app.manifest?.groups).toEqual(["image", "prompt"]);
    expect(app.timeline.tags).toEqual(["2019", "2020", "2021"]);
    expect(app.points.xs).toHaveLength(81);
  });

  it("shows an error banner when an artifact file fails, without throwing", async () => {
    const { app, frames } = makeApp({ failGrid: true });
    await app.load();
    const last = frames[frames.length - 1];
    expect(last.error).toMatch(/failed to load artifact/);
    expect(app.rings("overall")).toEqual([]);
  });

  it("computes slice rings for the active time tag", async () => {
    const { app } = makeApp();
    await app.load();
    const rings = app.rings("slice", "prompt", "2019");
    expect(rings.length).toBe(gridDoc.thresholds.length);
    expect(rings.some((r) => r.length > 0)).toBe(true);
    expect(app.rings("slice", "prompt", "1890")).toEqual([]);
  });
});

describe("search panel", () => {
  it("highlights exactly the oracle result set", async () => {
    const { app, frames } = makeApp();
    await app.load();
    await app.search("dialogue");
    const last = frames[frames.length - 1];
    const expected = searchOracle("dialogue");
    expect(expected.size).toBeGreaterThan(0);
    expect(last.highlights).toEqual(expected);
    expect(new Set(frozenSearch.results.map((h) => h.point_index))).toEqual(expected);
  });

  it("clearing the query removes highlights without a request", async () => {
    const log: string[] = [];
    const { app, frames } = makeApp({}, log);
    await app.load();
    await app.search("dialogue");
    const requestsAfterSearch = log.filter((u) => u.startsWith("/api/search")).length;
    await app.search("");
    expect(log.filter((u) => u.startsWith("/api/search"))).toHaveLength(requestsAfterSearch);
    const last = frames[frames.length - 1];
    expect(last.highlights.size).toBe(0);
    expect(last.searchResults).toEqual([]);
  });

  it("flags truncation when the limit is reached", async () => {
    const full: SearchResponse = {
      query: "x",
      limit: 50,
      results: Array.from({ length: 50 }, (_, i) => ({
        point_index: i,
        score: 1,
        snippet: "s",
      })),
    };
    const { app, frames } = makeApp({ search: () => full });
    await app.load();
    await app.search("anything");
    expect(frames[frames.length - 1].truncated).toBe(true);
  });

  it("reports search failures inline", async () => {
    const { app, frames } = makeApp({
      search: () => {
        throw new Error("search exploded");
      },
    });
    await app.load();
    await app.search("boom");
    expect(frames[frames.length - 1].error).toMatch(/search failed/);
  });
});

describe("view state integration", () => {
  it("URL fragment round-trips through a fresh app", async () => {
    const { app } = makeApp();
    await app.load();
    app.setView({ centerX: 0.41, centerY: 0.77, scale: 1234.5 });
    app.toggleLayer("scatter");
    app.toggleGroup("prompt");
    app.setTime("2020");
    await app.search("dialogue");
    const fragment = app.fragment();

    const { app: restored } = makeApp();
    restored.applyFragment(fragment);
    expect(restored.fragment()).toBe(fragment);
    expect(restored.view.centerX).toBe(0.41);
    expect(restored.view.scale).toBe(1234.5);
    expect(restored.view.layers.has("scatter")).toBe(false);
    expect(restored.view.groups).toEqual(new Set(["prompt"]));
    expect(restored.view.time).toBe("2020");
    expect(restored.view.query).toBe("dialogue");
  });

  it("steps time tags in order through the app", async () => {
    const { app, frames } = makeApp();
    await app.load();
    app.setTime("2019");
    app.stepTime();
    app.stepTime();
    app.stepTime(); // wraps
    const times = frames.map((f) => f.activeTime);
    expect(times.slice(-4)).toEqual(["2019", "2020", "2021", "2019"]);
  });

  it("answers hover lookups with the occupied tile's summary", async () => {
    const { app } = makeApp();
    await app.load();
    const hit = app.tileSummaryAt(0.2, 0.2);
    expect(hit).not.toBeNull();
    expect(hit!.keywords!.length).toBeGreaterThan(0);
    expect(app.tileSummaryAt(0.8, 0.2)).toBeNull(); // empty quadrant
    expect(app.tileSummaryAt(-5, -5)).toBeNull();
  });
});

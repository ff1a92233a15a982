/** Browser bootstrap: binds the headless app to the canvas and panels. */
import { AtlasApp, type Frame } from "./app";
import { AtlasClient } from "./api";
import {
  drawContourBands,
  drawHighlights,
  drawLabels,
  drawScatter,
  labelFromRecord,
  screenToWorld,
  GROUP_COLORS,
  OVERALL_COLOR,
  TIME_COLOR,
  type Camera,
  type DrawableLabel,
} from "./renderer";
import "./style.css";

const apiBase =
  new URLSearchParams(location.search).get("api") ?? "http://127.0.0.1:8080";

const canvas = document.getElementById("map") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const tooltip = document.getElementById("tooltip")!;
const banner = document.getElementById("error-banner")!;
const layerBoxes = document.querySelectorAll<HTMLInputElement>("input[data-layer]");
const groupPanel = document.getElementById("group-toggles")!;
const timeRow = document.getElementById("time-row")!;
const timeSlider = document.getElementById("time-slider") as HTMLInputElement;
const timeLabel = document.getElementById("time-label")!;
const playButton = document.getElementById("play") as HTMLButtonElement;
const searchInput = document.getElementById("search-input") as HTMLInputElement;
const searchResults = document.getElementById("search-results")!;
const searchNotice = document.getElementById("search-notice")!;
const statusLine = document.getElementById("status")!;

const dpr = window.devicePixelRatio || 1;
let lastFrame: Frame | null = null;
let drawQueued = false;

const app = new AtlasApp(new AtlasClient(apiBase), (frame) => {
  lastFrame = frame;
  if (!drawQueued) {
    drawQueued = true;
    requestAnimationFrame(() => {
      drawQueued = false;
      syncUi(frame);
      draw();
    });
  }
  history.replaceState(null, "", `#${app.fragment()}`);
});

function camera(): Camera {
  return {
    centerX: app.view.centerX,
    centerY: app.view.centerY,
    scale: app.view.scale * dpr,
    width: canvas.width,
    height: canvas.height,
  };
}

function resize(): void {
  canvas.width = canvas.clientWidth * dpr;
  canvas.height = canvas.clientHeight * dpr;
  draw();
}

function groupColor(tag: string): string {
  const groups = app.manifest?.groups ?? [];
  const at = groups.indexOf(tag);
  return GROUP_COLORS[(at >= 0 ? at : 0) % GROUP_COLORS.length];
}

function enabledGroups(): string[] {
  const all = app.manifest?.groups ?? [];
  if (all.length === 0) return [];
  const chosen = app.view.groups;
  return chosen.size > 0 ? all.filter((g) => chosen.has(g)) : all;
}

function visibleLabels(cam: Camera): DrawableLabel[] {
  const level = app.labelLevel();
  const summary = app.summaryDoc;
  if (level === null || !summary) return [];
  const coarsest = Math.min(...summary.levels.map((l) => l.level));
  if (level === coarsest) return app.labels().map((l) => labelFromRecord(l));
  const levelDoc = summary.levels.find((l) => l.level === level);
  if (!levelDoc) return [];
  const [wx0, wy1] = screenToWorld(cam, 0, 0);
  const [wx1, wy0] = screenToWorld(cam, cam.width, cam.height);
  return levelDoc.tiles
    .filter((t) => t.cx >= wx0 && t.cx <= wx1 && t.cy >= wy0 && t.cy <= wy1)
    .sort((a, b) => b.count - a.count)
    .slice(0, 24)
    .map((t) => ({
      x: t.cx,
      y: t.cy,
      text: (t.keywords ?? []).slice(0, 2).map(([term]) => term).join(" · ") ||
        `#${(t.exemplars ?? [])[0] ?? ""}`,
      emphasis: false,
    }));
}

function draw(): void {
  const cam = camera();
  ctx.clearRect(0, 0, cam.width, cam.height);
  if (!app.gridDoc) return;
  const view = app.view;
  const groups = enabledGroups();

  if (view.layers.has("contour")) {
    if (groups.length >= 2) {
      for (const g of groups) {
        drawContourBands(ctx, cam, app.rings("group", g), groupColor(g));
      }
    } else {
      drawContourBands(ctx, cam, app.rings("overall"), OVERALL_COLOR);
    }
    if (view.time !== null) {
      const sliceGroups = groups.length > 0 ? groups : [""];
      for (const g of sliceGroups) {
        drawContourBands(ctx, cam, app.rings("slice", g, view.time), TIME_COLOR, false);
      }
    }
  }

  if (view.layers.has("scatter") && app.points.xs.length > 0) {
    const groupSet = new Set(groups);
    const colors = new Map<string | undefined, [number, number, number]>();
    drawScatter(
      ctx,
      cam,
      app.points.xs,
      app.points.ys,
      (i) => {
        const tag = app.points.groups[i];
        let rgb = colors.get(tag);
        if (!rgb) {
          const hex = tag === undefined ? OVERALL_COLOR : groupColor(tag);
          const n = parseInt(hex.slice(1), 16);
          rgb = [(n >> 16) & 0xff, (n >> 8) & 0xff, n & 0xff];
          colors.set(tag, rgb);
        }
        return rgb;
      },
      (i) => {
        const tag = app.points.groups[i];
        return groupSet.size === 0 || tag === undefined || groupSet.has(tag);
      },
    );
  }

  if (lastFrame && lastFrame.highlights.size > 0) {
    drawHighlights(ctx, cam, app.points.xs, app.points.ys, lastFrame.highlights, dpr);
  }

  if (view.layers.has("labels")) {
    drawLabels(ctx, cam, visibleLabels(cam), dpr);
  }
}

function syncUi(frame: Frame): void {
  banner.textContent = frame.error ?? "";
  banner.classList.toggle("visible", frame.error !== null);
  statusLine.textContent = frame.streaming
    ? `streaming points… ${frame.pointsLoaded.toLocaleString()}`
    : `${frame.pointsLoaded.toLocaleString()} points`;

  layerBoxes.forEach((box) => {
    box.checked = frame.view.layers.has(box.dataset.layer as "contour");
  });

  const tags = app.timeline.tags;
  timeRow.classList.toggle("hidden", tags.length === 0);
  if (tags.length > 0) {
    timeSlider.max = String(tags.length - 1);
    const at = frame.activeTime ? tags.indexOf(frame.activeTime) : -1;
    if (at >= 0) timeSlider.value = String(at);
    timeLabel.textContent = frame.activeTime ?? "all";
    playButton.textContent = app.timeline.playing ? "⏸" : "▶";
  }

  searchNotice.textContent = frame.truncated
    ? `showing first ${frame.searchResults.length} matches`
    : "";
  searchResults.replaceChildren(
    ...frame.searchResults.map((hit) => {
      const item = document.createElement("li");
      item.textContent = hit.snippet || `point ${hit.point_index}`;
      item.title = `score ${hit.score.toFixed(4)}`;
      item.addEventListener("click", () => {
        app.setView({
          centerX: app.points.xs[hit.point_index] ?? app.view.centerX,
          centerY: app.points.ys[hit.point_index] ?? app.view.centerY,
        });
      });
      return item;
    }),
  );
}

function buildGroupToggles(): void {
  const groups = app.manifest?.groups ?? [];
  groupPanel.classList.toggle("hidden", groups.length < 2);
  groupPanel.replaceChildren(
    ...groups.map((tag) => {
      const label = document.createElement("label");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.checked = app.view.groups.size === 0 || app.view.groups.has(tag);
      box.addEventListener("change", () => app.toggleGroup(tag));
      const swatch = document.createElement("span");
      swatch.className = "swatch";
      swatch.style.background = groupColor(tag);
      label.append(box, swatch, tag);
      return label;
    }),
  );
}

// --- interactions --------------------------------------------------------

let dragging = false;
let lastPointer: [number, number] | null = null;

canvas.addEventListener("pointerdown", (ev) => {
  dragging = true;
  lastPointer = [ev.clientX, ev.clientY];
  canvas.setPointerCapture(ev.pointerId);
});
canvas.addEventListener("pointerup", () => {
  dragging = false;
  lastPointer = null;
});
canvas.addEventListener("pointermove", (ev) => {
  if (dragging && lastPointer) {
    const dx = (ev.clientX - lastPointer[0]) / app.view.scale;
    const dy = (ev.clientY - lastPointer[1]) / app.view.scale;
    lastPointer = [ev.clientX, ev.clientY];
    app.setView({ centerX: app.view.centerX - dx, centerY: app.view.centerY + dy });
    return;
  }
  const rect = canvas.getBoundingClientRect();
  const [wx, wy] = screenToWorld(
    camera(),
    (ev.clientX - rect.left) * dpr,
    (ev.clientY - rect.top) * dpr,
  );
  showTooltip(ev.clientX, ev.clientY, wx, wy);
});
canvas.addEventListener("pointerleave", () => tooltip.classList.remove("visible"));

canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  const factor = Math.exp(-ev.deltaY * 0.0015);
  const rect = canvas.getBoundingClientRect();
  const cam = camera();
  const [wx, wy] = screenToWorld(cam, (ev.clientX - rect.left) * dpr, (ev.clientY - rect.top) * dpr);
  const scale = app.view.scale * factor;
  // keep the world point under the cursor fixed while zooming
  app.setView({
    scale,
    centerX: wx - (wx - app.view.centerX) / factor,
    centerY: wy - (wy - app.view.centerY) / factor,
  });
}, { passive: false });

function showTooltip(clientX: number, clientY: number, wx: number, wy: number): void {
  // nearest scatter point within 6 px wins; otherwise the tile summary
  let bestIndex = -1;
  let bestDist = (6 / app.view.scale) ** 2;
  if (app.view.layers.has("scatter")) {
    for (let i = 0; i < app.points.xs.length; i++) {
      const d = (app.points.xs[i] - wx) ** 2 + (app.points.ys[i] - wy) ** 2;
      if (d < bestDist) {
        bestDist = d;
        bestIndex = i;
      }
    }
  }
  let text = "";
  if (bestIndex >= 0 && app.points.texts[bestIndex]) {
    text = app.points.texts[bestIndex]!;
  } else {
    const tile = app.tileSummaryAt(wx, wy);
    if (tile) {
      text = tile.keywords
        ? tile.keywords.map(([term]) => term).join(", ")
        : `exemplars: ${(tile.exemplars ?? []).join(", ")}`;
      text += ` (${tile.count} pts)`;
    }
  }
  tooltip.textContent = text;
  tooltip.classList.toggle("visible", text !== "");
  tooltip.style.left = `${clientX + 12}px`;
  tooltip.style.top = `${clientY + 12}px`;
}

layerBoxes.forEach((box) => {
  box.addEventListener("change", () => app.toggleLayer(box.dataset.layer as "contour"));
});

let searchTimer: ReturnType<typeof setTimeout> | undefined;
searchInput.addEventListener("input", () => {
  clearTimeout(searchTimer);
  searchTimer = setTimeout(() => void app.search(searchInput.value), 200);
});

timeSlider.addEventListener("input", () => {
  const tags = app.timeline.tags;
  app.setTime(tags[Number(timeSlider.value)] ?? null);
});
playButton.addEventListener("click", () => {
  if (app.timeline.playing) app.pauseTime();
  else app.playTime();
  playButton.textContent = app.timeline.playing ? "⏸" : "▶";
});

window.addEventListener("hashchange", () => app.applyFragment(location.hash));
window.addEventListener("resize", resize);

// --- startup --------------------------------------------------------------

resize();
const hadFragment = location.hash.length > 1;
if (hadFragment) app.applyFragment(location.hash);
void app.load().then(() => {
  buildGroupToggles();
  if (!hadFragment && app.gridDoc) {
    const { x0, x1, y0, y1 } = app.gridDoc.extent;
    app.setView({
      centerX: (x0 + x1) / 2,
      centerY: (y0 + y1) / 2,
      scale: (0.9 * Math.min(canvas.clientWidth, canvas.clientHeight)) / (x1 - x0),
    });
  }
  if (app.view.query) {
    searchInput.value = app.view.query;
    void app.search(app.view.query);
  }
});

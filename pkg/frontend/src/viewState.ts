/** Map view state and its lossless URL-fragment encoding.
 *
 * Fragment schema: `#x=<center x>&y=<center y>&s=<scale px/unit>` plus
 * `layers=` (enabled layer kinds, canonical order), `time=` (active tag),
 * `g=` (enabled groups) and `q=` (search query); empty fields are omitted.
 */

export const LAYER_KINDS = ["contour", "labels", "scatter"] as const;
export type LayerKind = (typeof LAYER_KINDS)[number];

export interface ViewState {
  centerX: number;
  centerY: number;
  scale: number;
  layers: Set<LayerKind>;
  groups: Set<string>;
  time: string | null;
  query: string | null;
}

export function defaultViewState(): ViewState {
  return {
    centerX: 0,
    centerY: 0,
    scale: 1,
    layers: new Set<LayerKind>(LAYER_KINDS),
    groups: new Set(),
    time: null,
    query: null,
  };
}

export function cloneViewState(view: ViewState): ViewState {
  return {
    ...view,
    layers: new Set(view.layers),
    groups: new Set(view.groups),
  };
}

export function viewStatesEqual(a: ViewState, b: ViewState): boolean {
  return encodeViewState(a) === encodeViewState(b);
}

export function encodeViewState(view: ViewState): string {
  const params = new URLSearchParams();
  params.set("x", String(view.centerX));
  params.set("y", String(view.centerY));
  params.set("s", String(view.scale));
  params.set("layers", LAYER_KINDS.filter((l) => view.layers.has(l)).join(","));
  if (view.time !== null) params.set("time", view.time);
  if (view.groups.size > 0) params.set("g", [...view.groups].sort().join(","));
  if (view.query !== null && view.query !== "") params.set("q", view.query);
  return params.toString();
}

export function decodeViewState(fragment: string, fallback?: ViewState): ViewState {
  const view = fallback ? cloneViewState(fallback) : defaultViewState();
  const params = new URLSearchParams(fragment.replace(/^#/, ""));
  const x = Number(params.get("x"));
  const y = Number(params.get("y"));
  const s = Number(params.get("s"));
  if (Number.isFinite(x)) view.centerX = x;
  if (Number.isFinite(y)) view.centerY = y;
  if (Number.isFinite(s) && s > 0) view.scale = s;
  if (params.has("layers")) {
    const kinds = params.get("layers")!.split(",").filter(Boolean);
    view.layers = new Set(
      LAYER_KINDS.filter((l) => kinds.includes(l)),
    );
  }
  view.time = params.get("time");
  view.groups = new Set((params.get("g") ?? "").split(",").filter(Boolean));
  view.query = params.get("q");
  return view;
}

export function toggleLayer(view: ViewState, layer: LayerKind): ViewState {
  const next = cloneViewState(view);
  if (next.layers.has(layer)) next.layers.delete(layer);
  else next.layers.add(layer);
  return next;
}

export function toggleGroup(view: ViewState, group: string): ViewState {
  const next = cloneViewState(view);
  if (next.groups.has(group)) next.groups.delete(group);
  else next.groups.add(group);
  return next;
}

/** Pick the summary depth whose tiles are nearest `targetPx` on screen.
 *
 * Ties resolve toward the finer level, which keeps the choice monotone:
 * increasing the scale never selects a coarser level.
 */
export function zoomToLevel(
  scale: number,
  availableLevels: number[],
  rootSide: number,
  targetPx = 150,
): number {
  if (availableLevels.length === 0) throw new Error("no summary levels available");
  let best = availableLevels[0];
  let bestDistance = Infinity;
  for (const level of [...availableLevels].sort((a, b) => a - b)) {
    const tilePx = (rootSide / 2 ** level) * scale;
    const distance = Math.abs(tilePx - targetPx);
    if (distance <= bestDistance) {
      best = level;
      bestDistance = distance;
    }
  }
  return best;
}

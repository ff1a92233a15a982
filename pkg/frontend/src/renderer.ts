/** Canvas drawing: contour bands, labels, and pixel-splatted scatter.
 *
 * All drawing happens in device pixels; the camera carries the composite
 * scale (view scale x devicePixelRatio). Scatter uses an ImageData splat so
 * a full redraw stays O(points) with no per-point path objects.
 */
import type { Ring } from "./contours";
import type { LabelRecord } from "./types";

export interface Camera {
  centerX: number;
  centerY: number;
  scale: number; // device px per projection unit
  width: number; // device px
  height: number;
}

/** Fixed accessible palette; groups take colors in sorted-tag order. */
export const GROUP_COLORS = ["#4263eb", "#e8590c", "#2b8a3e", "#9c36b5", "#1098ad", "#e64980"];
export const OVERALL_COLOR = "#4263eb";
export const TIME_COLOR = "#7048e8";
export const HIGHLIGHT_COLOR = "#f08c00";

export function worldToScreen(cam: Camera, x: number, y: number): [number, number] {
  return [
    (x - cam.centerX) * cam.scale + cam.width / 2,
    cam.height / 2 - (y - cam.centerY) * cam.scale,
  ];
}

export function screenToWorld(cam: Camera, sx: number, sy: number): [number, number] {
  return [
    (sx - cam.width / 2) / cam.scale + cam.centerX,
    (cam.height / 2 - sy) / cam.scale + cam.centerY,
  ];
}

function hexToRgb(hex: string): [number, number, number] {
  const n = parseInt(hex.slice(1), 16);
  return [(n >> 16) & 0xff, (n >> 8) & 0xff, n & 0xff];
}

export function drawContourBands(
  ctx: CanvasRenderingContext2D,
  cam: Camera,
  ringsPerThreshold: Ring[][],
  color: string,
  fill = true,
): void {
  const n = ringsPerThreshold.length;
  ringsPerThreshold.forEach((rings, band) => {
    if (rings.length === 0) return;
    const path = new Path2D();
    for (const ring of rings) {
      const [sx, sy] = worldToScreen(cam, ring[0][0], ring[0][1]);
      path.moveTo(sx, sy);
      for (let k = 1; k < ring.length; k++) {
        const [px, py] = worldToScreen(cam, ring[k][0], ring[k][1]);
        path.lineTo(px, py);
      }
      path.closePath();
    }
    const [r, g, b] = hexToRgb(color);
    if (fill) {
      ctx.fillStyle = `rgba(${r},${g},${b},${0.05 + (0.25 * (band + 1)) / n})`;
      ctx.fill(path);
    }
    ctx.strokeStyle = `rgba(${r},${g},${b},0.55)`;
    ctx.lineWidth = band === n - 1 ? 1.5 : 0.75;
    ctx.stroke(path);
  });
}

export function drawScatter(
  ctx: CanvasRenderingContext2D,
  cam: Camera,
  xs: number[],
  ys: number[],
  colorOf: (index: number) => [number, number, number],
  visible: (index: number) => boolean,
): void {
  const w = Math.floor(cam.width);
  const h = Math.floor(cam.height);
  if (w <= 0 || h <= 0 || xs.length === 0) return;
  const image = ctx.createImageData(w, h);
  const data = image.data;
  for (let i = 0; i < xs.length; i++) {
    if (!visible(i)) continue;
    const sx = Math.round((xs[i] - cam.centerX) * cam.scale + w / 2);
    const sy = Math.round(h / 2 - (ys[i] - cam.centerY) * cam.scale);
    if (sx < 0 || sx >= w || sy < 0 || sy >= h) continue;
    const at = (sy * w + sx) * 4;
    const [r, g, b] = colorOf(i);
    data[at] = r;
    data[at + 1] = g;
    data[at + 2] = b;
    data[at + 3] = Math.min(255, data[at + 3] + 140);
  }
  // composite through an offscreen canvas so existing layers show through
  const off = typeof OffscreenCanvas !== "undefined"
    ? new OffscreenCanvas(w, h)
    : Object.assign(document.createElement("canvas"), { width: w, height: h });
  const offCtx = off.getContext("2d") as CanvasRenderingContext2D;
  offCtx.putImageData(image, 0, 0);
  ctx.drawImage(off as CanvasImageSource, 0, 0);
}

export function drawHighlights(
  ctx: CanvasRenderingContext2D,
  cam: Camera,
  xs: number[],
  ys: number[],
  highlights: Set<number>,
  dpr: number,
): void {
  ctx.fillStyle = HIGHLIGHT_COLOR;
  ctx.strokeStyle = "#ffffff";
  ctx.lineWidth = dpr;
  for (const i of highlights) {
    if (i >= xs.length) continue;
    const [sx, sy] = worldToScreen(cam, xs[i], ys[i]);
    if (sx < -8 || sx > cam.width + 8 || sy < -8 || sy > cam.height + 8) continue;
    ctx.beginPath();
    ctx.arc(sx, sy, 3.5 * dpr, 0, Math.PI * 2);
    ctx.fill();
    ctx.stroke();
  }
}

export interface DrawableLabel {
  x: number;
  y: number;
  text: string;
  emphasis: boolean;
}

export function labelFromRecord(record: LabelRecord, maxTerms = 3): DrawableLabel {
  return {
    x: record.x,
    y: record.y,
    text: record.keywords.slice(0, maxTerms).map(([term]) => term).join(" · "),
    emphasis: true,
  };
}

export function drawLabels(
  ctx: CanvasRenderingContext2D,
  cam: Camera,
  labels: DrawableLabel[],
  dpr: number,
): void {
  ctx.textAlign = "center";
  ctx.textBaseline = "middle";
  for (const label of labels) {
    const [sx, sy] = worldToScreen(cam, label.x, label.y);
    if (sx < 0 || sx > cam.width || sy < 0 || sy > cam.height) continue;
    const size = (label.emphasis ? 13 : 11) * dpr;
    ctx.font = `${label.emphasis ? "600" : "400"} ${size}px system-ui, sans-serif`;
    ctx.lineWidth = 3 * dpr;
    ctx.strokeStyle = "rgba(255,255,255,0.85)";
    ctx.strokeText(label.text, sx, sy);
    ctx.fillStyle = "#1a1c20";
    ctx.fillText(label.text, sx, sy);
  }
}

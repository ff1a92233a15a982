/** Marching-squares isolines over a density grid.
 *
 * The sampled lattice is the grid's cell centers plus a ring of zero-valued
 * nodes on the grid extent, so every positive isoline closes inside the
 * extent. Mirrors the contour geometry the artifact builder uses.
 */
import type { Extent } from "./types";

export type Ring = [number, number][]; // closed: first point repeated last

interface Lattice {
  xs: number[];
  ys: number[];
  /** value at (i, j), indexed vals[i][j] */
  vals: number[][];
}

export function buildLattice(values: number[], nx: number, ny: number, extent: Extent): Lattice {
  const dx = (extent.x1 - extent.x0) / nx;
  const dy = (extent.y1 - extent.y0) / ny;
  const xs = [extent.x0];
  for (let i = 0; i < nx; i++) xs.push(extent.x0 + (i + 0.5) * dx);
  xs.push(extent.x1);
  const ys = [extent.y0];
  for (let j = 0; j < ny; j++) ys.push(extent.y0 + (j + 0.5) * dy);
  ys.push(extent.y1);

  const vals: number[][] = [];
  for (let i = 0; i < nx + 2; i++) vals.push(new Array<number>(ny + 2).fill(0));
  for (let i = 0; i < nx; i++) {
    for (let j = 0; j < ny; j++) {
      vals[i + 1][j + 1] = values[i * ny + j];
    }
  }
  return { xs, ys, vals };
}

// cell edge ids: 0=bottom 1=right 2=top 3=left
const SEGMENTS: Record<number, [number, number][]> = {
  0: [], 15: [],
  1: [[3, 0]], 14: [[3, 0]],
  2: [[0, 1]], 13: [[0, 1]],
  4: [[1, 2]], 11: [[1, 2]],
  8: [[2, 3]], 7: [[2, 3]],
  3: [[3, 1]], 12: [[3, 1]],
  6: [[0, 2]], 9: [[0, 2]],
};

function segmentsFor(code: number, centerInside: boolean): [number, number][] {
  if (code === 5) return centerInside ? [[0, 1], [2, 3]] : [[3, 0], [1, 2]];
  if (code === 10) return centerInside ? [[3, 0], [1, 2]] : [[0, 1], [2, 3]];
  return SEGMENTS[code];
}

export function traceRings(lattice: Lattice, threshold: number): Ring[] {
  const { xs, ys, vals } = lattice;
  const nX = xs.length;
  const nY = ys.length;
  const hEdge = (i: number, j: number) => i * nY + j;
  const vEdge = (i: number, j: number) => nX * nY + i * nY + j;

  const crossings = new Map<number, [number, number]>();
  const crossH = (i: number, j: number): number => {
    const e = hEdge(i, j);
    if (!crossings.has(e)) {
      const f = (threshold - vals[i][j]) / (vals[i + 1][j] - vals[i][j]);
      crossings.set(e, [xs[i] + f * (xs[i + 1] - xs[i]), ys[j]]);
    }
    return e;
  };
  const crossV = (i: number, j: number): number => {
    const e = vEdge(i, j);
    if (!crossings.has(e)) {
      const f = (threshold - vals[i][j]) / (vals[i][j + 1] - vals[i][j]);
      crossings.set(e, [xs[i], ys[j] + f * (ys[j + 1] - ys[j])]);
    }
    return e;
  };

  const adjacency = new Map<number, number[]>();
  const connect = (a: number, b: number) => {
    (adjacency.get(a) ?? adjacency.set(a, []).get(a)!).push(b);
    (adjacency.get(b) ?? adjacency.set(b, []).get(b)!).push(a);
  };

  for (let i = 0; i < nX - 1; i++) {
    for (let j = 0; j < nY - 1; j++) {
      const a = vals[i][j] > threshold ? 1 : 0;
      const b = vals[i + 1][j] > threshold ? 2 : 0;
      const c = vals[i + 1][j + 1] > threshold ? 4 : 0;
      const d = vals[i][j + 1] > threshold ? 8 : 0;
      const code = a | b | c | d;
      if (code === 0 || code === 15) continue;
      const center = (vals[i][j] + vals[i + 1][j] + vals[i + 1][j + 1] + vals[i][j + 1]) / 4;
      for (const [e0, e1] of segmentsFor(code, center > threshold)) {
        const ids: number[] = [];
        for (const side of [e0, e1]) {
          if (side === 0) ids.push(crossH(i, j));
          else if (side === 1) ids.push(crossV(i + 1, j));
          else if (side === 2) ids.push(crossH(i, j + 1));
          else ids.push(crossV(i, j));
        }
        connect(ids[0], ids[1]);
      }
    }
  }

  const rings: Ring[] = [];
  const visited = new Set<number>();
  const starts = [...adjacency.keys()].sort((p, q) => p - q);
  for (const start of starts) {
    if (visited.has(start)) continue;
    const loop = [start];
    visited.add(start);
    let previous = start;
    let current = Math.min(...adjacency.get(start)!);
    while (current !== start) {
      loop.push(current);
      visited.add(current);
      const [n0, n1] = adjacency.get(current)!;
      const next = n0 === previous ? n1 : n0;
      previous = current;
      current = next;
    }
    const ring: Ring = loop.map((e) => crossings.get(e)!);
    ring.push(ring[0]);
    if (ring.length >= 4) rings.push(ring);
  }
  return rings;
}

export function extractRings(
  values: number[],
  nx: number,
  ny: number,
  extent: Extent,
  threshold: number,
): Ring[] {
  return traceRings(buildLattice(values, nx, ny, extent), threshold);
}

export function ringArea(ring: Ring): number {
  let sum = 0;
  for (let k = 0; k < ring.length - 1; k++) {
    sum += ring[k][0] * ring[k + 1][1] - ring[k + 1][0] * ring[k][1];
  }
  return Math.abs(sum / 2);
}

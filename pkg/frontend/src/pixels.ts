// Client-side palette math, mirroring the server's projection semantics:
// nearest color by squared RGB distance, ties to the lowest palette index.

import type { Rgb } from "./types.js";

export interface RgbaImage {
  width: number;
  height: number;
  data: Uint8ClampedArray; // RGBA, row-major
}

export function projectToPalette(img: RgbaImage, palette: Rgb[]): Int32Array {
  const n = img.width * img.height;
  const indices = new Int32Array(n);
  for (let p = 0; p < n; p++) {
    const r = img.data[4 * p];
    const g = img.data[4 * p + 1];
    const b = img.data[4 * p + 2];
    let best = 0;
    let bestDist = Infinity;
    for (let k = 0; k < palette.length; k++) {
      const dr = r - palette[k][0];
      const dg = g - palette[k][1];
      const db = b - palette[k][2];
      const d = dr * dr + dg * dg + db * db;
      if (d < bestDist) {
        bestDist = d;
        best = k;
      }
    }
    indices[p] = best;
  }
  return indices;
}

export function renderIndexed(
  indices: Int32Array,
  palette: Rgb[],
  width: number,
  height: number,
): RgbaImage {
  const data = new Uint8ClampedArray(width * height * 4);
  for (let p = 0; p < indices.length; p++) {
    const [r, g, b] = palette[indices[p]];
    data[4 * p] = r;
    data[4 * p + 1] = g;
    data[4 * p + 2] = b;
    data[4 * p + 3] = 255;
  }
  return { width, height, data };
}

export function distinctColorCount(img: RgbaImage): number {
  const seen = new Set<number>();
  for (let p = 0; p < img.width * img.height; p++) {
    seen.add(
      (img.data[4 * p] << 16) | (img.data[4 * p + 1] << 8) | img.data[4 * p + 2],
    );
  }
  return seen.size;
}

export function rgbToHex([r, g, b]: Rgb): string {
  const h = (v: number) => v.toString(16).padStart(2, "0");
  return `#${h(r)}${h(g)}${h(b)}`;
}

export function hexToRgb(hex: string): Rgb {
  const raw = hex.replace("#", "");
  return [
    parseInt(raw.slice(0, 2), 16),
    parseInt(raw.slice(2, 4), 16),
    parseInt(raw.slice(4, 6), 16),
  ];
}

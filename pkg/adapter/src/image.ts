/** Decoding archived stills into flat RGB rasters. */

import * as fs from "node:fs";
import { PNG } from "pngjs";
import * as jpeg from "jpeg-js";

export interface Raster {
  width: number;
  height: number;
  /** RGB, row-major, 3 bytes per pixel. */
  data: Uint8Array;
}

function fromRgba(width: number, height: number, rgba: Uint8Array): Raster {
  const data = new Uint8Array(width * height * 3);
  for (let i = 0, j = 0; i < width * height; i++, j += 4) {
    data[i * 3] = rgba[j];
    data[i * 3 + 1] = rgba[j + 1];
    data[i * 3 + 2] = rgba[j + 2];
  }
  return { width, height, data };
}

export function decodeImage(path: string): Raster {
  const raw = fs.readFileSync(path);
  const lower = path.toLowerCase();
  if (lower.endsWith(".png")) {
    const png = PNG.sync.read(raw);
    return fromRgba(png.width, png.height, new Uint8Array(png.data));
  }
  if (lower.endsWith(".jpg") || lower.endsWith(".jpeg")) {
    const img = jpeg.decode(raw, { useTArray: true, maxMemoryUsageInMB: 64 });
    return fromRgba(img.width, img.height, new Uint8Array(img.data));
  }
  throw new Error(`unsupported image extension: ${path}`);
}

export function luminance(r: Raster, x: number, y: number): number {
  const i = (y * r.width + x) * 3;
  return 0.299 * r.data[i] + 0.587 * r.data[i + 1] + 0.114 * r.data[i + 2];
}

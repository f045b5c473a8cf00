/**
 * Deterministic luminance-blob detector.
 *
 * Stands in for a neural detector behind the same file contract: it finds
 * contiguous regions contrasting with the background and labels them from
 * their shape (tall boxes read as people, wide ones as vehicles).  Raw
 * confidences are exported unthresholded; the analytics side applies its
 * own cut.
 */

import { Raster, luminance } from "./image.js";

export const DETECTOR_NAME = "luma-blob";
export const DETECTOR_VERSION = "1.0.0";

export interface Detection {
  class: string;
  confidence: number;
  box: [number, number, number, number]; // x_min, y_min, x_max, y_max
}

interface Blob {
  xMin: number;
  yMin: number;
  xMax: number;
  yMax: number;
  pixels: number;
  contrast: number;
}

const MIN_BLOB_PIXELS = 6;

function classify(blob: Blob): string {
  const width = blob.xMax - blob.xMin + 1;
  const height = blob.yMax - blob.yMin + 1;
  const aspect = height / width;
  if (aspect >= 1.3) return "person";
  if (aspect <= 0.45) return "bus";
  if (aspect <= 0.8) return blob.pixels >= 220 ? "truck" : "car";
  return "motorcycle";
}

function confidence(blob: Blob): number {
  const area = (blob.xMax - blob.xMin + 1) * (blob.yMax - blob.yMin + 1);
  const fill = blob.pixels / area;
  const contrastTerm = Math.min(1, blob.contrast / 90);
  const value = 0.15 + 0.45 * fill + 0.4 * contrastTerm;
  return Math.min(0.99, Math.max(0.01, Math.round(value * 1000) / 1000));
}

export function detect(image: Raster): Detection[] {
  const { width, height } = image;
  const n = width * height;
  const luma = new Float64Array(n);
  let sum = 0;
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const v = luminance(image, x, y);
      luma[y * width + x] = v;
      sum += v;
    }
  }
  const mean = sum / n;
  let varSum = 0;
  for (let i = 0; i < n; i++) varSum += (luma[i] - mean) ** 2;
  const std = Math.sqrt(varSum / n);
  if (std < 1e-6) return []; // flat frame, nothing to find

  const cutoff = Math.max(18, 2 * std);
  const foreground = new Uint8Array(n);
  for (let i = 0; i < n; i++) {
    if (Math.abs(luma[i] - mean) > cutoff) foreground[i] = 1;
  }

  const seen = new Uint8Array(n);
  const blobs: Blob[] = [];
  const stack: number[] = [];
  for (let start = 0; start < n; start++) {
    if (!foreground[start] || seen[start]) continue;
    let xMin = width, xMax = 0, yMin = height, yMax = 0;
    let pixels = 0;
    let contrastSum = 0;
    stack.push(start);
    seen[start] = 1;
    while (stack.length > 0) {
      const index = stack.pop()!;
      const x = index % width;
      const y = (index - x) / width;
      pixels += 1;
      contrastSum += Math.abs(luma[index] - mean);
      if (x < xMin) xMin = x;
      if (x > xMax) xMax = x;
      if (y < yMin) yMin = y;
      if (y > yMax) yMax = y;
      const neighbors = [index - 1, index + 1, index - width, index + width];
      for (const next of neighbors) {
        if (next < 0 || next >= n || seen[next] || !foreground[next]) continue;
        if ((next === index - 1 || next === index + 1) &&
            Math.floor(next / width) !== y) continue; // row wrap
        seen[next] = 1;
        stack.push(next);
      }
    }
    if (pixels >= MIN_BLOB_PIXELS) {
      blobs.push({ xMin, yMin, xMax, yMax, pixels, contrast: contrastSum / pixels });
    }
  }

  blobs.sort((a, b) => a.yMin - b.yMin || a.xMin - b.xMin);
  return blobs.map((blob) => ({
    class: classify(blob),
    confidence: confidence(blob),
    box: [blob.xMin, blob.yMin, Math.min(blob.xMax + 1, width), Math.min(blob.yMax + 1, height)],
  }));
}

/**
 * Heuristic scene labeling over a seeded sample of archived images.
 *
 * Five images per camera are drawn uniformly without replacement (seeded,
 * reproducible) and each gets a coarse place label from global image
 * statistics.  Substitutable for a real scene classifier behind the same
 * scene-file contract.
 */

import { Raster, luminance } from "./image.js";

export const CLASSIFIER_NAME = "stat-scene";
export const CLASSIFIER_VERSION = "1.0.0";

export interface SceneLabel {
  scene: string;
  confidence: number;
}

/** Deterministic 32-bit PRNG (mulberry32). */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** k distinct indices from 0..n-1, uniform without replacement. */
export function sampleIndices(n: number, k: number, seed: number): number[] {
  const indices = Array.from({ length: n }, (_, i) => i);
  const rand = mulberry32(seed);
  for (let i = 0; i < Math.min(k, n); i++) {
    const j = i + Math.floor(rand() * (n - i));
    [indices[i], indices[j]] = [indices[j], indices[i]];
  }
  return indices.slice(0, k).sort((a, b) => a - b);
}

interface Features {
  brightness: number;
  edgeDensity: number;
  greenBias: number;
  blueBias: number;
}

function features(image: Raster): Features {
  const { width, height, data } = image;
  let lumaSum = 0;
  let edgeSum = 0;
  let red = 0, green = 0, blue = 0;
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const i = (y * width + x) * 3;
      red += data[i];
      green += data[i + 1];
      blue += data[i + 2];
      const v = luminance(image, x, y);
      lumaSum += v;
      if (x + 1 < width) edgeSum += Math.abs(v - luminance(image, x + 1, y));
      if (y + 1 < height) edgeSum += Math.abs(v - luminance(image, x, y + 1));
    }
  }
  const n = width * height;
  const total = red + green + blue + 1e-9;
  return {
    brightness: lumaSum / n,
    edgeDensity: edgeSum / (2 * n),
    greenBias: green / total,
    blueBias: blue / total,
  };
}

export function classifyScene(image: Raster): SceneLabel {
  const f = features(image);
  let scene: string;
  let margin: number;
  if (f.edgeDensity > 18) {
    scene = f.brightness > 110 ? "highway" : "road";
    margin = Math.min(1, f.edgeDensity / 60);
  } else if (f.greenBias > 0.38) {
    scene = "park";
    margin = Math.min(1, (f.greenBias - 0.34) * 12);
  } else if (f.blueBias > 0.38) {
    scene = f.brightness > 140 ? "beach" : "sky";
    margin = Math.min(1, (f.blueBias - 0.34) * 12);
  } else if (f.brightness < 40) {
    scene = "sky";
    margin = Math.min(1, (40 - f.brightness) / 40);
  } else {
    scene = "plaza";
    margin = 0.3;
  }
  const conf = Math.min(0.99, Math.max(0.05, 0.4 + 0.5 * margin));
  return { scene, confidence: Math.round(conf * 1000) / 1000 };
}

/**
 * Detection-over-archive and scene-over-archive runs, emitting the analytics
 * pipeline's JSON-lines schemas plus a manifest describing the run.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { readArchive, sampleClipFrames } from "./archive.js";
import { DETECTOR_NAME, DETECTOR_VERSION, detect } from "./detector.js";
import { decodeImage } from "./image.js";
import { CLASSIFIER_NAME, CLASSIFIER_VERSION, classifyScene, mulberry32, sampleIndices } from "./scenes.js";

export const DEFAULT_STRIDE = 30;
export const SCENE_SAMPLES = 5;

export interface RunStats {
  records: number;
  skipped: number;
  camerasSkipped?: number;
}

interface DetectionRecord {
  camera_id: string;
  captured_at: string;
  image_width: number;
  image_height: number;
  source: { kind: "still" } | { kind: "video"; frame_index: number };
  detections: { class: string; confidence: number; box: [number, number, number, number] }[];
}

function writeLines(outPath: string, lines: string[]): void {
  fs.mkdirSync(path.dirname(path.resolve(outPath)), { recursive: true });
  fs.writeFileSync(outPath, lines.map((l) => l + "\n").join(""));
}

function writeManifest(outPath: string, body: Record<string, unknown>): string {
  const manifestPath = outPath.replace(/\.jsonl$/, "") + ".manifest.json";
  fs.writeFileSync(manifestPath, JSON.stringify(body, null, 2) + "\n");
  return manifestPath;
}

export function detectArchive(archiveRoot: string, outPath: string,
                              stride: number = DEFAULT_STRIDE): RunStats {
  const lines: string[] = [];
  let skipped = 0;

  const record = (cameraId: string, capturedAt: string, imagePath: string,
                  source: DetectionRecord["source"]): void => {
    let raster;
    try {
      raster = decodeImage(imagePath);
    } catch (err) {
      console.warn(`skipping undecodable image ${imagePath}: ${err}`);
      skipped += 1;
      return;
    }
    const rec: DetectionRecord = {
      camera_id: cameraId,
      captured_at: capturedAt,
      image_width: raster.width,
      image_height: raster.height,
      source,
      detections: detect(raster).map((d) => ({
        class: d.class,
        confidence: d.confidence,
        box: d.box,
      })),
    };
    lines.push(JSON.stringify(rec));
  };

  for (const camera of readArchive(archiveRoot)) {
    for (const still of camera.stills) {
      record(camera.cameraId, still.capturedAt, still.path, { kind: "still" });
    }
    for (const clip of camera.clips) {
      for (const frame of sampleClipFrames(clip, stride)) {
        record(camera.cameraId, clip.capturedAt, frame.path,
               { kind: "video", frame_index: frame.index });
      }
    }
  }

  writeLines(outPath, lines);
  writeManifest(outPath, {
    model: DETECTOR_NAME,
    version: DETECTOR_VERSION,
    confidence_floor: 0.0,
    frame_stride: stride,
    archive_root: path.resolve(archiveRoot),
    outputs: [path.resolve(outPath)],
    preprocessing: "none",
  });
  return { records: lines.length, skipped };
}

export function classifyScenes(archiveRoot: string, outPath: string,
                               seed: number = 0,
                               samples: number = SCENE_SAMPLES): RunStats {
  const lines: string[] = [];
  let skipped = 0;
  let camerasSkipped = 0;

  for (const camera of readArchive(archiveRoot)) {
    const stills = camera.stills; // already in chronological order
    if (stills.length < samples) {
      console.warn(`camera ${camera.cameraId}: only ${stills.length} images, skipped`);
      camerasSkipped += 1;
      continue;
    }
    // camera-specific stream so adding cameras leaves other samples unchanged
    const cameraSeed = (seed ^ hashString(camera.cameraId)) >>> 0;
    const labels = [];
    for (const index of sampleIndices(stills.length, samples, cameraSeed)) {
      try {
        labels.push(classifyScene(decodeImage(stills[index].path)));
      } catch (err) {
        console.warn(`scene sample failed for ${stills[index].path}: ${err}`);
        skipped += 1;
      }
    }
    if (labels.length < samples) {
      camerasSkipped += 1;
      continue;
    }
    lines.push(JSON.stringify({ camera_id: camera.cameraId, labels }));
  }

  writeLines(outPath, lines);
  writeManifest(outPath, {
    model: CLASSIFIER_NAME,
    version: CLASSIFIER_VERSION,
    samples_per_camera: samples,
    seed,
    archive_root: path.resolve(archiveRoot),
    outputs: [path.resolve(outPath)],
  });
  return { records: lines.length, skipped, camerasSkipped };
}

function hashString(text: string): number {
  let hash = 2166136261;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 16777619);
  }
  return hash >>> 0;
}

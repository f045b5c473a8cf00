/**
 * Reading the capture archive layout:
 *   <root>/<camera_id>/<YYYY-MM-DD>/<HHMMSS>[-n].<ext>       still image
 *   <root>/<camera_id>/<YYYY-MM-DD>/<HHMMSS>.clip/frame_N.png clip frames
 */

import * as fs from "node:fs";
import * as path from "node:path";

export interface StillEntry {
  path: string;
  capturedAt: string; // RFC3339 UTC
}

export interface ClipFrame {
  index: number;
  path: string;
}

export interface ClipEntry {
  path: string;
  capturedAt: string;
  frames: ClipFrame[]; // ascending frame index
}

export interface CameraArchive {
  cameraId: string;
  stills: StillEntry[];
  clips: ClipEntry[];
}

const DATE_DIR = /^\d{4}-\d{2}-\d{2}$/;
const STILL_FILE = /^(\d{2})(\d{2})(\d{2})(?:-\d+)?\.(png|jpe?g)$/i;
const CLIP_DIR = /^(\d{2})(\d{2})(\d{2})(?:-\d+)?\.clip$/i;
const FRAME_FILE = /^frame_(\d+)\.(png|jpe?g)$/i;

function capturedAt(dateDir: string, hh: string, mm: string, ss: string): string {
  return `${dateDir}T${hh}:${mm}:${ss}Z`;
}

export function readArchive(root: string): CameraArchive[] {
  const cameras: CameraArchive[] = [];
  const cameraDirs = fs
    .readdirSync(root, { withFileTypes: true })
    .filter((e) => e.isDirectory())
    .map((e) => e.name)
    .sort();

  for (const cameraId of cameraDirs) {
    const stills: StillEntry[] = [];
    const clips: ClipEntry[] = [];
    const cameraPath = path.join(root, cameraId);
    const dateDirs = fs
      .readdirSync(cameraPath, { withFileTypes: true })
      .filter((e) => e.isDirectory() && DATE_DIR.test(e.name))
      .map((e) => e.name)
      .sort();

    for (const dateDir of dateDirs) {
      const dayPath = path.join(cameraPath, dateDir);
      for (const entry of fs.readdirSync(dayPath, { withFileTypes: true }).sort(
        (a, b) => a.name.localeCompare(b.name))) {
        const stillMatch = entry.name.match(STILL_FILE);
        if (entry.isFile() && stillMatch) {
          stills.push({
            path: path.join(dayPath, entry.name),
            capturedAt: capturedAt(dateDir, stillMatch[1], stillMatch[2], stillMatch[3]),
          });
          continue;
        }
        const clipMatch = entry.name.match(CLIP_DIR);
        if (entry.isDirectory() && clipMatch) {
          const clipPath = path.join(dayPath, entry.name);
          const frames: ClipFrame[] = [];
          for (const frameEntry of fs.readdirSync(clipPath)) {
            const frameMatch = frameEntry.match(FRAME_FILE);
            if (frameMatch) {
              frames.push({ index: parseInt(frameMatch[1], 10),
                            path: path.join(clipPath, frameEntry) });
            }
          }
          frames.sort((a, b) => a.index - b.index);
          clips.push({
            path: clipPath,
            capturedAt: capturedAt(dateDir, clipMatch[1], clipMatch[2], clipMatch[3]),
            frames,
          });
        }
      }
    }
    cameras.push({ cameraId, stills, clips });
  }
  return cameras;
}

/** Every stride-th frame of a clip: indices 0, stride, 2*stride, ... */
export function sampleClipFrames(clip: ClipEntry, stride: number): ClipFrame[] {
  const total = clip.frames.length > 0 ? clip.frames[clip.frames.length - 1].index + 1 : 0;
  const wanted = new Set<number>();
  for (let i = 0; i < total; i += stride) wanted.add(i);
  return clip.frames.filter((f) => wanted.has(f.index));
}

import * as fs from "node:fs";
import * as path from "node:path";
import { PNG } from "pngjs";

export interface Rect {
  x: number;
  y: number;
  w: number;
  h: number;
  shade?: number;
}

/** Write a PNG of a dark scene with bright axis-aligned rectangles. */
export function writeScenePng(filePath: string, width: number, height: number,
                              rects: Rect[], background = 20): void {
  const png = new PNG({ width, height });
  for (let i = 0; i < width * height; i++) {
    png.data[i * 4] = background;
    png.data[i * 4 + 1] = background;
    png.data[i * 4 + 2] = background;
    png.data[i * 4 + 3] = 255;
  }
  for (const rect of rects) {
    const shade = rect.shade ?? 210;
    for (let y = rect.y; y < rect.y + rect.h; y++) {
      for (let x = rect.x; x < rect.x + rect.w; x++) {
        const i = (y * width + x) * 4;
        png.data[i] = shade;
        png.data[i + 1] = shade;
        png.data[i + 2] = shade;
      }
    }
  }
  fs.mkdirSync(path.dirname(filePath), { recursive: true });
  fs.writeFileSync(filePath, PNG.sync.write(png));
}

export const PERSON_RECT = { w: 4, h: 10 };
export const CAR_RECT = { w: 10, h: 5 };

/**
 * A 20-still archive across two cameras.  Every image holds one person-shaped
 * and one car-shaped blob at deterministic positions.
 */
export function makeArchive(root: string): { cameras: string[]; imageCount: number } {
  const cameras = ["11aa22bb33cc44dd", "55ee66ff77881199"];
  const days = ["2020-04-01", "2020-04-02"];
  let count = 0;
  for (const [c, cameraId] of cameras.entries()) {
    const perDay = c === 0 ? 6 : 4;
    for (const day of days) {
      for (let k = 0; k < perDay; k++) {
        const name = `${String(6 + 2 * k).padStart(2, "0")}0000.png`;
        const px = 5 + ((k * 7 + c * 3) % 40);
        const py = 4 + ((k * 5) % 20);
        writeScenePng(path.join(root, cameraId, day, name), 64, 48, [
          { x: px, y: py, ...PERSON_RECT },
          { x: 48 - ((k * 3) % 10), y: 36, ...CAR_RECT },
        ]);
        count += 1;
      }
    }
  }
  return { cameras, imageCount: count };
}

export function readJsonl(filePath: string): any[] {
  return fs.readFileSync(filePath, "utf-8")
    .split("\n")
    .filter((line) => line.trim().length > 0)
    .map((line) => JSON.parse(line));
}

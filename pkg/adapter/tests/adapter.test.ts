import { spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { afterAll, describe, expect, it } from "vitest";

import { classifyScenes, detectArchive } from "../src/emit.js";
import { CAR_RECT, PERSON_RECT, makeArchive, readJsonl, writeScenePng } from "./helpers.js";

const tmp = fs.mkdtempSync(path.join(os.tmpdir(), "adapter-contract-"));
afterAll(() => fs.rmSync(tmp, { recursive: true, force: true }));

const RFC3339 = /^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z$/;
const CLASSES = new Set(["person", "car", "truck", "motorcycle", "bus"]);

function checkRecordSchema(rec: any): void {
  expect(typeof rec.camera_id).toBe("string");
  expect(rec.captured_at).toMatch(RFC3339);
  expect(Number.isInteger(rec.image_width) && rec.image_width >= 1).toBe(true);
  expect(Number.isInteger(rec.image_height) && rec.image_height >= 1).toBe(true);
  expect(["still", "video"]).toContain(rec.source.kind);
  if (rec.source.kind === "video") {
    expect(Number.isInteger(rec.source.frame_index) && rec.source.frame_index >= 0).toBe(true);
  }
  for (const det of rec.detections) {
    expect(CLASSES.has(det.class)).toBe(true);
    expect(det.confidence).toBeGreaterThanOrEqual(0);
    expect(det.confidence).toBeLessThanOrEqual(1);
    const [x0, y0, x1, y1] = det.box;
    expect(x1).toBeGreaterThan(x0);
    expect(y1).toBeGreaterThan(y0);
    expect(x0).toBeGreaterThanOrEqual(0);
    expect(y0).toBeGreaterThanOrEqual(0);
    expect(x1).toBeLessThanOrEqual(rec.image_width);
    expect(y1).toBeLessThanOrEqual(rec.image_height);
  }
}

describe("detect over a 20-image archive", () => {
  const root = path.join(tmp, "archive20");
  const out = path.join(tmp, "detections.jsonl");
  const { imageCount } = makeArchive(root);
  const stats = detectArchive(root, out);

  it("emits one schema-valid record per image", () => {
    expect(imageCount).toBe(20);
    expect(stats.records).toBe(20);
    expect(stats.skipped).toBe(0);
    const records = readJsonl(out);
    expect(records).toHaveLength(20);
    for (const rec of records) checkRecordSchema(rec);
    // blobs planted in every fixture image must come through
    expect(records.every((r: any) => r.detections.length === 2)).toBe(true);
    expect(records.some((r: any) => r.detections.some((d: any) => d.class === "person"))).toBe(true);
  });

  it("passes the analytics loader in strict mode (round-trip contract)", () => {
    const probe = spawnSync("python3", ["-c", [
      "import sys",
      "from camwatch.detections import load_detection_file",
      "frames = load_detection_file(sys.argv[1], strict=True)",
      "print(len(frames))",
    ].join("\n"), out], { encoding: "utf-8" });
    expect(probe.stderr).toBe("");
    expect(probe.status).toBe(0);
    expect(probe.stdout.trim()).toBe("20");
  });

  it("writes a manifest recording the backend", () => {
    const manifest = JSON.parse(
      fs.readFileSync(path.join(tmp, "detections.manifest.json"), "utf-8"));
    expect(manifest.model).toBe("luma-blob");
    expect(manifest.confidence_floor).toBe(0);
    expect(manifest.outputs).toContain(path.resolve(out));
  });
});

describe("video clips", () => {
  it("samples exactly the stride-30 lattice", () => {
    const root = path.join(tmp, "cliparchive");
    const clipDir = path.join(root, "cameraclip0000001", "2020-04-01", "120000.clip");
    for (let i = 0; i < 95; i++) {
      writeScenePng(path.join(clipDir, `frame_${String(i).padStart(6, "0")}.png`),
                    48, 32, [{ x: 4 + (i % 20), y: 6, ...PERSON_RECT }]);
    }
    const out = path.join(tmp, "clip.jsonl");
    const stats = detectArchive(root, out);
    const records = readJsonl(out);
    expect(stats.records).toBe(4);
    expect(records.map((r: any) => r.source.frame_index)).toEqual([0, 30, 60, 90]);
    expect(records.every((r: any) => r.source.kind === "video")).toBe(true);
    for (const rec of records) checkRecordSchema(rec);
  });
});

describe("robustness", () => {
  it("skips a corrupt image and keeps going", () => {
    const root = path.join(tmp, "corrupt");
    writeScenePng(path.join(root, "cam1", "2020-04-01", "060000.png"), 48, 32,
                  [{ x: 4, y: 4, ...CAR_RECT }]);
    fs.writeFileSync(path.join(root, "cam1", "2020-04-01", "070000.png"),
                     Buffer.from("definitely not a png"));
    const out = path.join(tmp, "corrupt.jsonl");
    const stats = detectArchive(root, out);
    expect(stats.records).toBe(1);
    expect(stats.skipped).toBe(1);
  });
});

describe("scene classification", () => {
  const root = path.join(tmp, "scenes");
  makeArchive(root);
  // a third camera with too few images
  writeScenePng(path.join(root, "sparsecam0000001", "2020-04-01", "060000.png"),
                48, 32, []);

  it("emits exactly five labels per eligible camera, skipping sparse ones", () => {
    const out = path.join(tmp, "scenes.jsonl");
    const stats = classifyScenes(root, out, 0);
    expect(stats.camerasSkipped).toBe(1);
    const records = readJsonl(out);
    expect(records).toHaveLength(2);
    for (const rec of records) {
      expect(rec.labels).toHaveLength(5);
      for (const label of rec.labels) {
        expect(typeof label.scene).toBe("string");
        expect(label.confidence).toBeGreaterThan(0);
        expect(label.confidence).toBeLessThanOrEqual(1);
      }
    }
  });

  it("is reproducible for a fixed seed and changes with the seed", () => {
    const out1 = path.join(tmp, "scenes-a.jsonl");
    const out2 = path.join(tmp, "scenes-b.jsonl");
    classifyScenes(root, out1, 42);
    classifyScenes(root, out2, 42);
    expect(fs.readFileSync(out1, "utf-8")).toBe(fs.readFileSync(out2, "utf-8"));
  });

  it("feeds the analytics scene loader", () => {
    const out = path.join(tmp, "scenes-c.jsonl");
    classifyScenes(root, out, 0);
    const probe = spawnSync("python3", ["-c", [
      "import sys",
      "from camwatch.detections import assign_scene, load_scene_file",
      "entries = load_scene_file(sys.argv[1])",
      "assert entries, 'no scene entries parsed'",
      "for camera_id, labels in entries:",
      "    assignment = assign_scene(camera_id, labels)",
      "    assert len(assignment.labels) == 5",
      "print(len(entries))",
    ].join("\n"), out], { encoding: "utf-8" });
    expect(probe.stderr).toBe("");
    expect(probe.status).toBe(0);
    expect(probe.stdout.trim()).toBe("2");
  });
});

#!/usr/bin/env python3
"""Regenerate the committed test fixtures under tests/fixtures/.

Deterministic: fixed seeds, fixed timestamps.  Produces a small synthetic
camera fleet (two healthy cameras, one frozen, one static web asset), an
archive of ~50 PNGs, detection/scene JSON-lines files, and a region map.
"""

import json
import shutil
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from camwatch.cameras import camera_id_for_url
from camwatch.detections import (
    BoundingBox,
    Detection,
    FrameDetections,
    write_detection_file,
)
from camwatch.images import PixelImage, encode_png
from camwatch.jsonio import write_jsonl

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "tests" / "fixtures"

URL_A = "http://fixtures.camwatch.test/cam-a.jpg"
URL_B = "http://fixtures.camwatch.test/cam-b.jpg"
URL_FROZEN = "http://fixtures.camwatch.test/cam-frozen.jpg"
URL_STATIC = "http://fixtures.camwatch.test/static-logo.jpg"

BASE_DAY = datetime(2020, 4, 1, tzinfo=timezone.utc)
W, H = 64, 48
DET_W, DET_H = 640, 480


def scene_image(rng):
    arr = rng.integers(0, 256, size=(H, W, 3), dtype=np.int64).astype(np.uint8)
    return PixelImage.from_array(arr)


def write_archive(root: Path) -> dict:
    rng = np.random.default_rng(42)
    counts = {}

    for url, days, per_day in ((URL_A, 5, 4), (URL_B, 3, 6)):
        camera_id = camera_id_for_url(url)
        hour_step = 18 // per_day
        for d in range(days):
            day = (BASE_DAY + timedelta(days=d)).strftime("%Y-%m-%d")
            for k in range(per_day):
                path = root / camera_id / day / f"{6 + hour_step * k:02d}0000.png"
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_bytes(encode_png(scene_image(rng)))
                counts[camera_id] = counts.get(camera_id, 0) + 1

    frozen_id = camera_id_for_url(URL_FROZEN)
    frozen_frame = encode_png(scene_image(rng))
    for d in range(3):
        day = (BASE_DAY + timedelta(days=d)).strftime("%Y-%m-%d")
        for k in range(4):
            path = root / frozen_id / day / f"{6 + 4 * k:02d}0000.png"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(frozen_frame)
            counts[frozen_id] = counts.get(frozen_id, 0) + 1

    return counts


def person_box(x, y, scale=1.0):
    w, h = 14 * scale, 34 * scale
    return BoundingBox(x, y, min(x + w, DET_W), min(y + h, DET_H))


def vehicle_box(x, y):
    return BoundingBox(x, y, min(x + 36, DET_W), min(y + 18, DET_H))


def people_frame(camera_id, when, positions, confidences):
    dets = tuple(
        Detection(box=person_box(x, y), class_label="person", confidence=c)
        for (x, y), c in zip(positions, confidences))
    return FrameDetections(camera_id=camera_id, captured_at=when, image_width=DET_W,
                           image_height=DET_H, detections=dets)


def write_detections(path: Path) -> None:
    rng = np.random.default_rng(7)
    cam_a = camera_id_for_url(URL_A)
    cam_b = camera_id_for_url(URL_B)
    frames = []

    def conf():
        return round(float(rng.uniform(0.35, 0.98)), 3)

    # cam A: a people camera, sparse most days with one crowded day
    for d in range(5):
        for hour in (9, 13, 17):
            when = BASE_DAY + timedelta(days=d, hours=hour)
            if d == 3 and hour == 13:
                # crowd: grid of 45 with plenty of close pairs
                positions = [(40 + (i % 9) * 28.0, 120 + (i // 9) * 45.0) for i in range(45)]
                confidences = [conf() for _ in positions]
            else:
                n = int(rng.integers(0, 6))
                positions = [(float(rng.uniform(10, 580)), float(rng.uniform(10, 430)))
                             for _ in range(n)]
                confidences = [round(float(rng.uniform(0.1, 0.98)), 3) for _ in range(n)]
            frames.append(people_frame(cam_a, when, positions, confidences))

    # cam A: one video clip, 1800 frames sampled every 30th
    clip_at = BASE_DAY + timedelta(days=1, hours=15)
    for index in range(0, 1800, 30):
        n = int(rng.integers(0, 7))
        dets = tuple(
            Detection(box=person_box(float(rng.uniform(10, 580)), float(rng.uniform(10, 430))),
                      class_label="person", confidence=conf())
            for _ in range(n))
        frames.append(FrameDetections(camera_id=cam_a, captured_at=clip_at,
                                      image_width=DET_W, image_height=DET_H,
                                      detections=dets, source_kind="video",
                                      frame_index=index))

    # cam B: a highway camera with one heavy-traffic day
    for d in range(5):
        for hour in (8, 18):
            when = BASE_DAY + timedelta(days=d, hours=hour)
            if d == 2 and hour == 8:
                n_vehicles = 55
            else:
                n_vehicles = int(rng.integers(0, 20))
            dets = [
                Detection(box=vehicle_box(float(rng.uniform(5, 600)), float(rng.uniform(5, 455))),
                          class_label=str(rng.choice(["car", "truck", "bus", "motorcycle"])),
                          confidence=conf())
                for _ in range(n_vehicles)
            ]
            for _ in range(int(rng.integers(0, 3))):  # the odd pedestrian
                dets.append(Detection(
                    box=person_box(float(rng.uniform(10, 580)), float(rng.uniform(10, 430))),
                    class_label="person", confidence=conf()))
            frames.append(FrameDetections(camera_id=cam_b, captured_at=when,
                                          image_width=DET_W, image_height=DET_H,
                                          detections=tuple(dets)))

    frames.sort(key=lambda f: (f.camera_id, f.captured_at, f.frame_index or -1))
    path.parent.mkdir(parents=True, exist_ok=True)
    write_detection_file(path, frames)


def main() -> None:
    if FIXTURES.exists():
        shutil.rmtree(FIXTURES)
    FIXTURES.mkdir(parents=True)

    write_archive(FIXTURES / "archive")
    write_detections(FIXTURES / "detections" / "frames.jsonl")

    candidates = [
        {"url": url, "kind": "still_image",
         "source_page": "http://fixtures.camwatch.test/cams.html",
         "discovered_at": "2020-03-31T08:00:00Z"}
        for url in (URL_A, URL_B, URL_FROZEN, URL_STATIC)
    ]
    write_jsonl(FIXTURES / "candidates.jsonl", candidates)

    scenes = [
        {"camera_id": camera_id_for_url(URL_A), "labels": [
            {"scene": "crosswalk", "confidence": 0.81},
            {"scene": "crosswalk", "confidence": 0.77},
            {"scene": "plaza", "confidence": 0.52},
            {"scene": "crosswalk", "confidence": 0.69},
            {"scene": "park", "confidence": 0.41}]},
        {"camera_id": camera_id_for_url(URL_B), "labels": [
            {"scene": "highway", "confidence": 0.92},
            {"scene": "highway", "confidence": 0.88},
            {"scene": "road", "confidence": 0.61},
            {"scene": "highway", "confidence": 0.85},
            {"scene": "desert road", "confidence": 0.33}]},
        {"camera_id": camera_id_for_url(URL_FROZEN), "labels": [
            {"scene": "sky", "confidence": 0.95},
            {"scene": "sky", "confidence": 0.93},
            {"scene": "sky", "confidence": 0.90},
            {"scene": "sky", "confidence": 0.97},
            {"scene": "sky", "confidence": 0.91}]},
    ]
    write_jsonl(FIXTURES / "scenes.jsonl", scenes)

    regions = FIXTURES / "regions.csv"
    regions.write_text(
        "camera_id,country,state,city\n"
        f"{camera_id_for_url(URL_A)},US,NY,New York\n"
        f"{camera_id_for_url(URL_B)},CH,FR,Schwarzsee\n"
        f"{camera_id_for_url(URL_FROZEN)},US,WA,Tacoma\n")

    config = {
        "archive_root": "archive",
        "captures_per_day": 4,
        "liveness": {"samples": 3, "spacing_seconds": 0.0},
        "scenes": {
            "vehicle_scenes": ["highway", "road"],
            "people_scenes": ["crosswalk", "park", "plaza", "beach"],
        },
        "presentation": {"min_people": 40, "min_vehicles": 50},
        "region_map_path": "regions.csv",
        "output_dir": "out",
    }
    (FIXTURES / "pipeline.json").write_text(json.dumps(config, indent=2) + "\n")

    total_images = sum(1 for _ in (FIXTURES / "archive").rglob("*.png"))
    print(f"fixtures written under {FIXTURES} ({total_images} archive images)")


if __name__ == "__main__":
    main()

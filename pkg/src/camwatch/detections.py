"""Loading and reducing externally produced detection and scene files.

Detectors run elsewhere and emit JSON lines; this module validates them,
applies the confidence cut, maps class labels to people/vehicle counts,
assigns cameras to analysis tasks from scene labels, and reduces video-clip
frames to per-clip counts.
"""

import json
import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import datetime
from typing import Iterable, Optional, Sequence

from .errors import InvalidInput, SchemaError
from .jsonio import format_rfc3339, parse_rfc3339, read_jsonl, write_jsonl

logger = logging.getLogger(__name__)

PERSON_CLASS = "person"
VEHICLE_CLASSES = frozenset({"car", "truck", "motorcycle", "bus"})

DEFAULT_CONFIDENCE = 0.3
DEFAULT_FRAME_STRIDE = 30

SOURCE_STILL = "still"
SOURCE_VIDEO = "video"

TASK_PEOPLE = "people"
TASK_VEHICLES = "vehicles"

DEFAULT_VEHICLE_SCENES = frozenset({"highway", "road"})


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box in pixels, origin top-left."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if self.x_min < 0 or self.y_min < 0:
            raise InvalidInput(f"negative box coordinates: {self}")
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise InvalidInput(f"box must have strictly positive area: {self}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple:
        return ((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)


@dataclass(frozen=True)
class Detection:
    box: BoundingBox
    class_label: str
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise InvalidInput(f"confidence out of range: {self.confidence}")


@dataclass(frozen=True)
class FrameDetections:
    camera_id: str
    captured_at: datetime
    image_width: int
    image_height: int
    detections: tuple
    source_kind: str = SOURCE_STILL
    frame_index: Optional[int] = None

    def __post_init__(self):
        if self.image_width < 1 or self.image_height < 1:
            raise InvalidInput("image dimensions must be positive")
        if self.source_kind not in (SOURCE_STILL, SOURCE_VIDEO):
            raise InvalidInput(f"unknown source kind: {self.source_kind!r}")
        if self.source_kind == SOURCE_VIDEO and (self.frame_index is None or self.frame_index < 0):
            raise InvalidInput("video frames require a non-negative frame_index")
        object.__setattr__(self, "detections", tuple(self.detections))
        for det in self.detections:
            box = det.box
            if box.x_max > self.image_width or box.y_max > self.image_height:
                raise InvalidInput(
                    f"box {box} exceeds image bounds {self.image_width}x{self.image_height}")


@dataclass(frozen=True)
class SceneAssignment:
    camera_id: str
    labels: tuple            # exactly 5 (scene, confidence) pairs
    primary_scene: str
    tasks: frozenset


def frame_to_record(frame: FrameDetections) -> dict:
    source = {"kind": frame.source_kind}
    if frame.source_kind == SOURCE_VIDEO:
        source["frame_index"] = frame.frame_index
    return {
        "camera_id": frame.camera_id,
        "captured_at": format_rfc3339(frame.captured_at),
        "image_width": frame.image_width,
        "image_height": frame.image_height,
        "source": source,
        "detections": [
            {
                "class": det.class_label,
                "confidence": det.confidence,
                "box": [det.box.x_min, det.box.y_min, det.box.x_max, det.box.y_max],
            }
            for det in frame.detections
        ],
    }


def frame_from_record(rec: dict) -> FrameDetections:
    try:
        source = rec.get("source") or {"kind": SOURCE_STILL}
        detections = []
        for det in rec["detections"]:
            x_min, y_min, x_max, y_max = (float(v) for v in det["box"])
            detections.append(Detection(
                box=BoundingBox(x_min, y_min, x_max, y_max),
                class_label=str(det["class"]),
                confidence=float(det["confidence"]),
            ))
        return FrameDetections(
            camera_id=str(rec["camera_id"]),
            captured_at=parse_rfc3339(rec["captured_at"]),
            image_width=int(rec["image_width"]),
            image_height=int(rec["image_height"]),
            detections=tuple(detections),
            source_kind=str(source.get("kind", SOURCE_STILL)),
            frame_index=source.get("frame_index"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed detection record: {exc}") from exc


def load_detection_file(path, strict: bool = False) -> list:
    """Load a JSON-lines detection file, validating every record.

    Invalid records are reported with their line number and skipped; in
    strict mode any invalid record (or an empty file) is fatal.
    """
    frames = []
    for lineno, rec in _iter_records(path, strict):
        try:
            frames.append(frame_from_record(rec))
        except InvalidInput as exc:
            if strict:
                raise SchemaError(f"{path}:{lineno}: {exc}") from exc
            logger.warning("%s:%d: skipping invalid record: %s", path, lineno, exc)
    if strict and not frames:
        raise SchemaError(f"{path}: no valid detection records")
    return frames


def _iter_records(path, strict: bool):
    try:
        rows = read_jsonl(path)
        for lineno, rec in rows:
            yield lineno, rec
    except json.JSONDecodeError as exc:
        if strict:
            raise SchemaError(f"{path}: invalid JSON at line {exc.lineno}") from exc
        logger.warning("%s: stopping at invalid JSON line %d", path, exc.lineno)


def write_detection_file(path, frames: Iterable[FrameDetections]) -> None:
    write_jsonl(path, (frame_to_record(f) for f in frames))


def filter_confident(frame: FrameDetections, threshold: float = DEFAULT_CONFIDENCE) -> FrameDetections:
    """Retain detections with confidence >= threshold, preserving order."""
    if not 0.0 <= threshold <= 1.0:
        raise InvalidInput(f"threshold out of range: {threshold}")
    kept = tuple(d for d in frame.detections if d.confidence >= threshold)
    return replace(frame, detections=kept)


def count_people(frame: FrameDetections) -> int:
    return sum(1 for d in frame.detections if d.class_label.lower() == PERSON_CLASS)


def count_vehicles(frame: FrameDetections) -> int:
    return sum(1 for d in frame.detections if d.class_label.lower() in VEHICLE_CLASSES)


def assign_scene(camera_id: str, labels: Sequence[tuple],
                 vehicle_scenes: frozenset = DEFAULT_VEHICLE_SCENES,
                 people_scenes: frozenset = frozenset()) -> SceneAssignment:
    """Reduce 5 per-image scene classifications to one camera assignment.

    The primary scene is the mode of the 5 labels; ties go to the tied label
    whose member pair carries the highest confidence.  A camera is assigned
    the vehicle task when any of its 5 labels is a vehicle scene, and the
    people task when any label is a people scene.
    """
    if len(labels) != 5:
        raise InvalidInput(f"scene assignment takes exactly 5 labels, got {len(labels)}")

    normalized = [(str(scene).lower(), float(conf)) for scene, conf in labels]
    counts = Counter(scene for scene, _ in normalized)
    top = max(counts.values())
    tied = {scene for scene, n in counts.items() if n == top}
    best_conf = {scene: max(c for s, c in normalized if s == scene) for scene in tied}
    first_seen = {scene: next(i for i, (s, _) in enumerate(normalized) if s == scene)
                  for scene in tied}
    primary = min(tied, key=lambda s: (-best_conf[s], first_seen[s]))

    vehicle_scenes = frozenset(s.lower() for s in vehicle_scenes)
    people_scenes = frozenset(s.lower() for s in people_scenes)
    tasks = set()
    if any(scene in vehicle_scenes for scene, _ in normalized):
        tasks.add(TASK_VEHICLES)
    if any(scene in people_scenes for scene, _ in normalized):
        tasks.add(TASK_PEOPLE)

    return SceneAssignment(camera_id=camera_id, labels=tuple(normalized),
                           primary_scene=primary, tasks=frozenset(tasks))


def load_scene_file(path) -> list:
    """Load scene JSON lines: {"camera_id", "labels": [{"scene", "confidence"}] x5}."""
    entries = []
    for lineno, rec in read_jsonl(path):
        try:
            labels = [(str(l["scene"]), float(l["confidence"])) for l in rec["labels"]]
            entries.append((str(rec["camera_id"]), labels))
        except (KeyError, TypeError, ValueError) as exc:
            logger.warning("%s:%d: skipping invalid scene record: %s", path, lineno, exc)
    return entries


def sample_video_frames(total_frames: int, stride: int = DEFAULT_FRAME_STRIDE) -> list:
    """Frame indices kept when saving every ``stride``-th frame of a clip."""
    if total_frames < 1:
        raise InvalidInput("total_frames must be >= 1")
    if stride < 1:
        raise InvalidInput("stride must be >= 1")
    return list(range(0, total_frames, stride))


def clip_person_count(frames: Sequence[FrameDetections]) -> int:
    """Person count for a clip: the maximum over its sampled frames."""
    return max((count_people(f) for f in frames), default=0)


def clip_vehicle_count(frames: Sequence[FrameDetections]) -> int:
    return max((count_vehicles(f) for f in frames), default=0)

"""Pairwise social-distancing scoring over person detections.

For each pair of person boxes the score is the product of a depth-similarity
ratio (smaller box area over larger) and an inverse relative distance (mean
box height over the pixel distance between box centers).  A score above the
threshold marks the pair as violating.  With the default threshold
6/5.4 a flagged pair is estimated closer than 6 feet under the equal-height
assumption.
"""

import math
from dataclasses import dataclass, field
from datetime import datetime
from typing import Optional, Sequence

from .detections import BoundingBox, FrameDetections
from .errors import InvalidBox, InvalidInput
from .jsonio import format_rfc3339, parse_rfc3339, read_jsonl, write_jsonl

DEFAULT_ASSUMED_HEIGHT_FT = 5.4
DEFAULT_DISTANCE_FT = 6.0


@dataclass(frozen=True)
class DistancingConfig:
    """Geometry constants; the default threshold is distance over body height."""

    assumed_height_ft: float = DEFAULT_ASSUMED_HEIGHT_FT
    distance_ft: float = DEFAULT_DISTANCE_FT
    violation_threshold: Optional[float] = None

    def __post_init__(self):
        if self.assumed_height_ft <= 0 or self.distance_ft <= 0:
            raise InvalidInput("heights and distances must be positive")
        if self.violation_threshold is None:
            object.__setattr__(self, "violation_threshold",
                               self.distance_ft / self.assumed_height_ft)
        if self.violation_threshold <= 0:
            raise InvalidInput("violation_threshold must be positive")


@dataclass(frozen=True)
class PairScore:
    index_a: int
    index_b: int
    depth_similarity: float
    pixel_distance: float
    inverse_relative_distance: float
    score: float
    violation: bool


@dataclass(frozen=True)
class ViolationReport:
    camera_id: str
    captured_at: datetime
    person_count: int
    pairs: tuple
    violating_pairs: int
    violating_people: int
    frame_index: Optional[int] = None


def _box_area(box: BoundingBox) -> float:
    area = box.area
    if area <= 0:
        raise InvalidBox(f"box has non-positive area: {box}")
    return area


def depth_similarity(a: BoundingBox, b: BoundingBox) -> float:
    """Smaller box area over larger; 1 when equal, toward 0 with depth difference."""
    area_a, area_b = _box_area(a), _box_area(b)
    return min(area_a, area_b) / max(area_a, area_b)


def pair_score(a: BoundingBox, b: BoundingBox,
               config: DistancingConfig = DistancingConfig(),
               index_a: int = 0, index_b: int = 1,
               zero_distance_score: float = math.inf) -> PairScore:
    """Score one pair of person boxes.

    Coincident centers cannot be scored by the ratio, so that corner case is
    always a violation and carries the given sentinel score.
    """
    similarity = depth_similarity(a, b)
    (ax, ay), (bx, by) = a.center, b.center
    distance = math.hypot(ax - bx, ay - by)
    mean_height = (a.height + b.height) / 2.0

    if distance == 0.0:
        return PairScore(index_a=index_a, index_b=index_b,
                         depth_similarity=similarity, pixel_distance=0.0,
                         inverse_relative_distance=math.inf,
                         score=zero_distance_score, violation=True)

    inverse_relative = mean_height / distance
    score = inverse_relative * similarity
    return PairScore(index_a=index_a, index_b=index_b,
                     depth_similarity=similarity, pixel_distance=distance,
                     inverse_relative_distance=inverse_relative,
                     score=score, violation=score > config.violation_threshold)


def violation_report(frame: FrameDetections,
                     config: DistancingConfig = DistancingConfig()) -> ViolationReport:
    """Score all pairwise combinations of the frame's person boxes.

    Expects a confidence-filtered, persons-only frame.  ``violating_people``
    counts distinct detections appearing in at least one violating pair, so
    it is never exactly 1.
    """
    boxes = [d.box for d in frame.detections]
    n = len(boxes)
    pairs = []
    violating_indices = set()
    for i in range(n):
        for j in range(i + 1, n):
            scored = pair_score(boxes[i], boxes[j], config, index_a=i, index_b=j,
                                zero_distance_score=float(frame.image_height))
            pairs.append(scored)
            if scored.violation:
                violating_indices.update((i, j))

    return ViolationReport(
        camera_id=frame.camera_id,
        captured_at=frame.captured_at,
        person_count=n,
        pairs=tuple(pairs),
        violating_pairs=sum(1 for p in pairs if p.violation),
        violating_people=len(violating_indices),
        frame_index=frame.frame_index,
    )


def report_to_record(report: ViolationReport) -> dict:
    rec = {
        "camera_id": report.camera_id,
        "captured_at": format_rfc3339(report.captured_at),
        "person_count": report.person_count,
        "violating_pairs": report.violating_pairs,
        "violating_people": report.violating_people,
        "pairs": [
            {
                "a": p.index_a,
                "b": p.index_b,
                "depth_similarity": p.depth_similarity,
                "pixel_distance": p.pixel_distance,
                "inverse_relative_distance": (
                    None if math.isinf(p.inverse_relative_distance)
                    else p.inverse_relative_distance),
                "score": None if math.isinf(p.score) else p.score,
                "violation": p.violation,
            }
            for p in report.pairs
        ],
    }
    if report.frame_index is not None:
        rec["frame_index"] = report.frame_index
    return rec


def report_from_record(rec: dict) -> ViolationReport:
    pairs = tuple(
        PairScore(
            index_a=int(p["a"]),
            index_b=int(p["b"]),
            depth_similarity=float(p["depth_similarity"]),
            pixel_distance=float(p["pixel_distance"]),
            inverse_relative_distance=(
                math.inf if p["inverse_relative_distance"] is None
                else float(p["inverse_relative_distance"])),
            score=math.inf if p["score"] is None else float(p["score"]),
            violation=bool(p["violation"]),
        )
        for p in rec["pairs"]
    )
    return ViolationReport(
        camera_id=rec["camera_id"],
        captured_at=parse_rfc3339(rec["captured_at"]),
        person_count=int(rec["person_count"]),
        pairs=pairs,
        violating_pairs=int(rec["violating_pairs"]),
        violating_people=int(rec["violating_people"]),
        frame_index=rec.get("frame_index"),
    )


def write_violation_file(path, reports: Sequence[ViolationReport],
                         group_bounds: Optional[Sequence] = None) -> None:
    """Write reports as JSON lines, optionally appending per-report group bounds."""
    records = []
    for i, report in enumerate(reports):
        rec = report_to_record(report)
        if group_bounds is not None:
            rec["group_lower"] = group_bounds[i].lower
            rec["group_upper"] = group_bounds[i].upper
        records.append(rec)
    write_jsonl(path, records)


def read_violation_file(path) -> list:
    """Read (ViolationReport, raw_record) pairs; raw carries any group fields."""
    return [(report_from_record(rec), rec) for _, rec in read_jsonl(path)]

"""Detection evaluation against ground truth: IoU matching, F1, and mAP."""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .detections import (
    DEFAULT_CONFIDENCE,
    BoundingBox,
    Detection,
    FrameDetections,
    load_detection_file,
)
from .errors import InvalidBox, MissingTruth
from .jsonio import parse_rfc3339, read_jsonl

logger = logging.getLogger(__name__)

DEFAULT_IOU_THRESHOLD = 0.5


@dataclass(frozen=True)
class GroundTruthFrame:
    image_id: str
    boxes: tuple  # (BoundingBox, class_label) pairs


@dataclass(frozen=True)
class EvalResult:
    true_positives: int
    false_positives: int
    false_negatives: int
    precision: float
    recall: float
    f1: float
    average_precision: dict
    mean_ap: float

    def to_record(self) -> dict:
        return {
            "true_positives": self.true_positives,
            "false_positives": self.false_positives,
            "false_negatives": self.false_negatives,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "average_precision": dict(sorted(self.average_precision.items())),
            "mean_ap": self.mean_ap,
        }


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection area over union area of two boxes."""
    if a.area <= 0 or b.area <= 0:
        raise InvalidBox("iou requires positive-area boxes")
    ix = max(0.0, min(a.x_max, b.x_max) - max(a.x_min, b.x_min))
    iy = max(0.0, min(a.y_max, b.y_max) - max(a.y_min, b.y_min))
    intersection = ix * iy
    union = a.area + b.area - intersection
    return intersection / union


def match_frame(predictions: Sequence[Detection], truth_boxes: Sequence[BoundingBox],
                iou_threshold: float = DEFAULT_IOU_THRESHOLD) -> tuple:
    """Greedy one-to-one matching of same-class predictions to truth boxes.

    Predictions must be sorted by descending confidence.  Each prediction
    takes the highest-IoU still-unmatched truth box when that IoU reaches the
    threshold (TP), otherwise it is a FP.  Returns (per-prediction TP flags,
    FN count).
    """
    matched = [False] * len(truth_boxes)
    flags = []
    for det in predictions:
        best_index, best_iou = -1, 0.0
        for t, tbox in enumerate(truth_boxes):
            if matched[t]:
                continue
            value = iou(det.box, tbox)
            if value > best_iou:
                best_index, best_iou = t, value
        if best_index >= 0 and best_iou >= iou_threshold:
            matched[best_index] = True
            flags.append(True)
        else:
            flags.append(False)
    return flags, matched.count(False)


def frame_image_id(frame: FrameDetections) -> str:
    """Stable image key aligning prediction and truth records."""
    suffix = "still" if frame.frame_index is None else f"f{frame.frame_index}"
    return f"{frame.camera_id}@{frame.captured_at.isoformat()}#{suffix}"


def load_truth_file(path) -> list:
    """Load ground truth in the detection JSON-lines schema (confidence ignored)."""
    truths = []
    for lineno, rec in read_jsonl(path):
        try:
            boxes = tuple(
                (BoundingBox(*(float(v) for v in det["box"])), str(det["class"]))
                for det in rec["detections"]
            )
            source = rec.get("source") or {}
            suffix = ("still" if source.get("kind", "still") == "still"
                      else f"f{source.get('frame_index')}")
            image_id = f"{rec['camera_id']}@{parse_rfc3339(rec['captured_at']).isoformat()}#{suffix}"
            truths.append(GroundTruthFrame(image_id=image_id, boxes=boxes))
        except (KeyError, TypeError, ValueError) as exc:
            logger.warning("%s:%d: skipping invalid truth record: %s", path, lineno, exc)
    return truths


def _class_average_precision(ranked_predictions, truth_by_image, iou_threshold) -> Optional[float]:
    """AP for one class by sweeping the confidence-ranked prediction list.

    All-points interpolation: the precision envelope is made monotonically
    non-increasing, then integrated over the recall steps.
    """
    total_truth = sum(len(boxes) for boxes in truth_by_image.values())
    if total_truth == 0:
        return None

    matched = {image_id: [False] * len(boxes) for image_id, boxes in truth_by_image.items()}
    tp_flags = []
    for image_id, det in ranked_predictions:
        boxes = truth_by_image.get(image_id, ())
        flags = matched.get(image_id, [])
        best_index, best_iou = -1, 0.0
        for t, tbox in enumerate(boxes):
            if flags[t]:
                continue
            value = iou(det.box, tbox)
            if value > best_iou:
                best_index, best_iou = t, value
        if best_index >= 0 and best_iou >= iou_threshold:
            flags[best_index] = True
            tp_flags.append(1.0)
        else:
            tp_flags.append(0.0)

    if not tp_flags:
        return 0.0

    tp_cum = np.cumsum(tp_flags)
    ranks = np.arange(1, len(tp_flags) + 1)
    precision = tp_cum / ranks
    recall = tp_cum / total_truth

    mrec = np.concatenate(([0.0], recall, [1.0]))
    mpre = np.concatenate(([0.0], precision, [0.0]))
    for i in range(mpre.size - 1, 0, -1):
        mpre[i - 1] = max(mpre[i - 1], mpre[i])
    steps = np.where(mrec[1:] != mrec[:-1])[0]
    return float(np.sum((mrec[steps + 1] - mrec[steps]) * mpre[steps + 1]))


def evaluate_frames(prediction_frames: Sequence[FrameDetections],
                    truth_frames: Sequence[GroundTruthFrame],
                    classes: Sequence[str],
                    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
                    operating_confidence: float = DEFAULT_CONFIDENCE) -> EvalResult:
    """Aggregate TP/FP/FN at the operating confidence and AP over all confidences.

    TP/FP/FN (and the derived precision/recall/F1) are micro-aggregated over
    the requested classes at ``operating_confidence``; AP is computed per
    class over the full confidence sweep and averaged into mAP.  Classes
    without any ground-truth box are excluded from mAP.
    """
    classes = [c.lower() for c in classes]
    truth_map = {t.image_id: t for t in truth_frames}

    for frame in prediction_frames:
        image_id = frame_image_id(frame)
        if image_id not in truth_map:
            raise MissingTruth(f"no ground truth for image {image_id}")

    tp = fp = fn = 0
    ap_by_class: dict = {}

    for class_label in classes:
        truth_by_image = {
            t.image_id: [box for box, label in t.boxes if label.lower() == class_label]
            for t in truth_frames
        }

        # operating-point counts, matched frame by frame
        class_fn = 0
        for image_id, truth_boxes in truth_by_image.items():
            frame_preds = [
                det
                for frame in prediction_frames if frame_image_id(frame) == image_id
                for det in frame.detections
                if det.class_label.lower() == class_label and det.confidence >= operating_confidence
            ]
            frame_preds.sort(key=lambda d: -d.confidence)
            flags, missed = match_frame(frame_preds, truth_boxes, iou_threshold)
            tp += sum(flags)
            fp += len(flags) - sum(flags)
            class_fn += missed
        fn += class_fn

        # confidence sweep for AP
        ranked = sorted(
            (
                (frame_image_id(frame), det)
                for frame in prediction_frames
                for det in frame.detections
                if det.class_label.lower() == class_label
            ),
            key=lambda pair: -pair[1].confidence,
        )
        ap = _class_average_precision(ranked, truth_by_image, iou_threshold)
        if ap is None:
            logger.warning("class %r has no ground-truth boxes; excluded from mAP", class_label)
        else:
            ap_by_class[class_label] = ap

    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    mean_ap = sum(ap_by_class.values()) / len(ap_by_class) if ap_by_class else 0.0

    return EvalResult(
        true_positives=tp, false_positives=fp, false_negatives=fn,
        precision=precision, recall=recall, f1=f1,
        average_precision=ap_by_class, mean_ap=mean_ap,
    )


def evaluate(prediction_files: Sequence, truth_files: Sequence, classes: Sequence[str],
             iou_threshold: float = DEFAULT_IOU_THRESHOLD,
             operating_confidence: float = DEFAULT_CONFIDENCE) -> EvalResult:
    predictions = [f for path in prediction_files for f in load_detection_file(path)]
    truths = [t for path in truth_files for t in load_truth_file(path)]
    return evaluate_frames(predictions, truths, classes, iou_threshold, operating_confidence)

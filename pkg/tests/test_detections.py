import json
from datetime import datetime, timezone

import pytest

from camwatch.detections import (
    BoundingBox,
    Detection,
    FrameDetections,
    assign_scene,
    clip_person_count,
    count_people,
    count_vehicles,
    filter_confident,
    frame_to_record,
    load_detection_file,
    sample_video_frames,
    write_detection_file,
)
from camwatch.errors import InvalidInput, SchemaError

AT = datetime(2020, 4, 1, 13, 0, 0, tzinfo=timezone.utc)


def det(label, conf, x=10.0, y=10.0, w=20.0, h=40.0):
    return Detection(box=BoundingBox(x, y, x + w, y + h), class_label=label, confidence=conf)


def frame(dets, camera="camA", width=640, height=480, **kw):
    return FrameDetections(camera_id=camera, captured_at=AT, image_width=width,
                           image_height=height, detections=tuple(dets), **kw)


class TestTypes:
    def test_box_must_have_positive_area(self):
        with pytest.raises(InvalidInput):
            BoundingBox(10, 10, 10, 20)
        with pytest.raises(InvalidInput):
            BoundingBox(10, 10, 5, 20)

    def test_negative_coordinates_rejected(self):
        with pytest.raises(InvalidInput):
            BoundingBox(-1, 0, 10, 10)

    def test_confidence_range(self):
        with pytest.raises(InvalidInput):
            det("person", 1.5)

    def test_box_must_fit_image(self):
        with pytest.raises(InvalidInput):
            frame([det("person", 0.9, x=630.0)])  # 630+20 > 640

    def test_video_frame_needs_index(self):
        with pytest.raises(InvalidInput):
            frame([], source_kind="video")
        ok = frame([], source_kind="video", frame_index=30)
        assert ok.frame_index == 30


class TestLoader:
    def _write(self, tmp_path, records):
        path = tmp_path / "dets.jsonl"
        with open(path, "w") as fh:
            for rec in records:
                fh.write(json.dumps(rec) + "\n")
        return path

    def _record(self, **overrides):
        rec = {
            "camera_id": "camA",
            "captured_at": "2020-04-01T13:00:00Z",
            "image_width": 640,
            "image_height": 480,
            "source": {"kind": "still"},
            "detections": [
                {"class": "person", "confidence": 0.8, "box": [10, 10, 30, 50]}],
        }
        rec.update(overrides)
        return rec

    def test_two_valid_records(self, tmp_path):
        path = self._write(tmp_path, [self._record(), self._record(camera_id="camB")])
        frames = load_detection_file(path)
        assert [f.camera_id for f in frames] == ["camA", "camB"]
        assert frames[0].detections[0].class_label == "person"

    def test_invalid_box_skipped_with_warning(self, tmp_path, caplog):
        bad = self._record()
        bad["detections"] = [{"class": "person", "confidence": 0.8, "box": [30, 10, 10, 50]}]
        path = self._write(tmp_path, [self._record(), bad])
        with caplog.at_level("WARNING"):
            frames = load_detection_file(path)
        assert len(frames) == 1
        assert any(":2:" in rec.message for rec in caplog.records)

    def test_strict_mode_fatal(self, tmp_path):
        bad = self._record(image_width=-5)
        path = self._write(tmp_path, [bad])
        with pytest.raises(SchemaError):
            load_detection_file(path, strict=True)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        assert load_detection_file(path) == []
        with pytest.raises(SchemaError):
            load_detection_file(path, strict=True)

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(OSError):
            load_detection_file(tmp_path / "missing.jsonl")

    def test_roundtrip(self, tmp_path):
        frames = [frame([det("person", 0.9), det("car", 0.4)]),
                  frame([det("bus", 0.7)], source_kind="video", frame_index=30)]
        path = tmp_path / "out.jsonl"
        write_detection_file(path, frames)
        loaded = load_detection_file(path, strict=True)
        assert loaded == frames

    def test_video_record_roundtrip_keeps_index(self):
        f = frame([det("person", 0.5)], source_kind="video", frame_index=60)
        rec = frame_to_record(f)
        assert rec["source"] == {"kind": "video", "frame_index": 60}


class TestFilterConfident:
    def test_boundary_inclusive(self):
        f = frame([det("person", 0.9), det("person", 0.31), det("person", 0.29)])
        kept = filter_confident(f, 0.3)
        assert [d.confidence for d in kept.detections] == [0.9, 0.31]

    def test_exact_threshold_kept(self):
        f = frame([det("person", 0.3)])
        assert len(filter_confident(f, 0.3).detections) == 1

    def test_zero_threshold_keeps_all(self):
        f = frame([det("person", 0.0), det("person", 0.1)])
        assert len(filter_confident(f, 0.0).detections) == 2

    def test_empty(self):
        assert filter_confident(frame([]), 0.3).detections == ()

    def test_idempotent(self):
        f = frame([det("person", c) for c in (0.1, 0.3, 0.5, 0.9)])
        once = filter_confident(f, 0.3)
        twice = filter_confident(once, 0.3)
        assert once == twice

    def test_invalid_threshold(self):
        with pytest.raises(InvalidInput):
            filter_confident(frame([]), 1.5)


class TestCounts:
    def test_mixed_labels(self):
        f = frame([det("person", 0.9), det("car", 0.9), det("person", 0.8), det("bus", 0.7)])
        assert count_people(f) == 2
        assert count_vehicles(f) == 2

    def test_label_outside_both_sets(self):
        f = frame([det("bicycle", 0.9)])
        assert count_people(f) == 0
        assert count_vehicles(f) == 0

    def test_empty(self):
        assert count_people(frame([])) == 0
        assert count_vehicles(frame([])) == 0

    def test_case_insensitive(self):
        f = frame([det("Person", 0.9), det("CAR", 0.9), det("Truck", 0.9),
                   det("Motorcycle", 0.9), det("BUS", 0.9)])
        assert count_people(f) == 1
        assert count_vehicles(f) == 4

    def test_partition(self):
        labels = ["person", "car", "kite", "person", "dog", "bus"]
        f = frame([det(l, 0.9) for l in labels])
        non_person = sum(1 for d in f.detections if d.class_label != "person")
        assert count_people(f) + non_person == len(f.detections)


class TestAssignScene:
    def test_clear_mode_with_tasks(self):
        labels = [("highway", 0.9), ("highway", 0.8), ("highway", 0.7),
                  ("crosswalk", 0.95), ("crosswalk", 0.6)]
        a = assign_scene("camA", labels, people_scenes=frozenset({"crosswalk"}))
        assert a.primary_scene == "highway"
        assert a.tasks == frozenset({"vehicles", "people"})

    def test_tie_broken_by_confidence(self):
        labels = [("park", 0.8), ("park", 0.4), ("beach", 0.9), ("beach", 0.2),
                  ("plaza", 0.99)]
        a = assign_scene("camA", labels)
        assert a.primary_scene == "beach"  # modes park/beach tied, 0.9 > 0.8

    def test_all_identical(self):
        a = assign_scene("camA", [("desert road", 0.5)] * 5)
        assert a.primary_scene == "desert road"

    def test_permutation_invariant(self):
        labels = [("park", 0.8), ("beach", 0.9), ("park", 0.4), ("beach", 0.2),
                  ("plaza", 0.99)]
        base = assign_scene("camA", labels)
        import itertools
        for perm in itertools.islice(itertools.permutations(labels), 0, 120, 7):
            assert assign_scene("camA", list(perm)).primary_scene == base.primary_scene

    def test_vehicle_task_from_any_label(self):
        labels = [("beach", 0.9), ("beach", 0.8), ("beach", 0.7), ("beach", 0.6),
                  ("road", 0.5)]
        a = assign_scene("camA", labels)
        assert "vehicles" in a.tasks

    def test_wrong_label_count(self):
        with pytest.raises(InvalidInput):
            assign_scene("camA", [("park", 0.5)] * 4)


class TestVideoSampling:
    def test_thirty_fps_minute_clip(self):
        indices = sample_video_frames(1800, 30)
        assert len(indices) == 60
        assert indices[0] == 0 and indices[-1] == 1770
        assert all(i % 30 == 0 for i in indices)

    def test_short_clip(self):
        assert sample_video_frames(29, 30) == [0]

    def test_stride_one(self):
        assert sample_video_frames(5, 1) == [0, 1, 2, 3, 4]

    def test_invalid(self):
        with pytest.raises(InvalidInput):
            sample_video_frames(0)
        with pytest.raises(InvalidInput):
            sample_video_frames(10, 0)


class TestClipCount:
    def _clip_frame(self, n_people, index):
        return frame([det("person", 0.9, x=float(30 * i)) for i in range(n_people)],
                     source_kind="video", frame_index=index)

    def test_max_over_frames(self):
        frames = [self._clip_frame(0, 0), self._clip_frame(3, 30), self._clip_frame(1, 60)]
        assert clip_person_count(frames) == 3

    def test_single_frame(self):
        assert clip_person_count([self._clip_frame(7, 0)]) == 7

    def test_empty_clip(self):
        assert clip_person_count([]) == 0

    def test_at_least_every_frame(self):
        frames = [self._clip_frame(n, 30 * i) for i, n in enumerate([2, 5, 1, 4])]
        top = clip_person_count(frames)
        assert all(top >= count_people(f) for f in frames)

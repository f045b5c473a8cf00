import http.server
import json
import threading
from pathlib import Path

import numpy as np
import pytest

from camwatch.cli import main
from camwatch.config import validate_config
from camwatch.errors import ConfigError
from camwatch.images import encode_png

from conftest import random_image

FIXTURES = Path(__file__).parent / "fixtures"


def write_config(tmp_path, body: dict) -> Path:
    path = tmp_path / "config.json"
    path.write_text(json.dumps(body))
    return path


class TestValidateConfig:
    def test_valid_fixture_config(self):
        config = validate_config(FIXTURES / "pipeline.json")
        assert config.captures_per_day == 4
        assert config.archive_root == (FIXTURES / "archive").resolve()
        assert "crosswalk" in config.people_scenes
        assert config.distancing.violation_threshold == pytest.approx(6 / 5.4)

    def test_invalid_captures_per_day_names_field(self, tmp_path):
        path = write_config(tmp_path, {"captures_per_day": 0})
        with pytest.raises(ConfigError) as exc:
            validate_config(path)
        assert any("captures_per_day" in p for p in exc.value.problems)

    def test_all_violations_reported_at_once(self, tmp_path):
        path = write_config(tmp_path, {
            "captures_per_day": 0,
            "confidence_threshold": 3.0,
            "liveness": {"min_percent": 2.0},
        })
        with pytest.raises(ConfigError) as exc:
            validate_config(path)
        joined = "\n".join(exc.value.problems)
        assert "captures_per_day" in joined
        assert "confidence_threshold" in joined
        assert "liveness.min_percent" in joined

    def test_unknown_key_warns_not_errors(self, tmp_path, caplog):
        path = write_config(tmp_path, {"captures_per_day": 3, "future_knob": True})
        with caplog.at_level("WARNING"):
            config = validate_config(path)
        assert config.captures_per_day == 3
        assert any("future_knob" in rec.message for rec in caplog.records)

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(ConfigError):
            validate_config(tmp_path / "missing.json")

    def test_env_override(self, tmp_path, monkeypatch):
        path = write_config(tmp_path, {"captures_per_day": 3})
        monkeypatch.setenv("CAMWATCH_CAPTURES_PER_DAY", "7")
        assert validate_config(path).captures_per_day == 7


class _CameraHandler(http.server.BaseHTTPRequestHandler):
    hits: dict = {}

    def do_GET(self):
        rng = np.random.default_rng(abs(hash(self.path)) % (2**32) + self.hits.get(self.path, 0))
        self.hits[self.path] = self.hits.get(self.path, 0) + 1
        if self.path.startswith("/live"):
            body = encode_png(random_image(rng, 16, 16))
        elif self.path.startswith("/static"):
            fixed = np.random.default_rng(5)
            body = encode_png(random_image(fixed, 16, 16))
        else:
            self.send_error(404)
            return
        self.send_response(200)
        self.send_header("Content-Type", "image/png")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture
def camera_server():
    server = http.server.ThreadingHTTPServer(("127.0.0.1", 0), _CameraHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()


class TestCliIdentifyOverHttp:
    def test_live_static_and_unreachable(self, camera_server, tmp_path):
        candidates = tmp_path / "candidates.jsonl"
        rows = [
            {"url": f"{camera_server}/live/cam.jpg", "kind": "still_image",
             "source_page": camera_server, "discovered_at": "2020-04-01T00:00:00Z"},
            {"url": f"{camera_server}/static/logo.jpg", "kind": "still_image",
             "source_page": camera_server, "discovered_at": "2020-04-01T00:00:00Z"},
            {"url": f"{camera_server}/gone/x.jpg", "kind": "still_image",
             "source_page": camera_server, "discovered_at": "2020-04-01T00:00:00Z"},
        ]
        candidates.write_text("".join(json.dumps(r) + "\n" for r in rows))
        out = tmp_path / "cameras.jsonl"
        verdicts = tmp_path / "verdicts.jsonl"
        code = main(["identify", "--candidates", str(candidates), "--out", str(out),
                     "--verdicts", str(verdicts), "--samples", "3", "--spacing", "0"])
        assert code == 0
        by_url = {json.loads(line)["url"]: json.loads(line)["status"]
                  for line in out.read_text().splitlines()}
        statuses = {url.rsplit("/", 2)[-2]: status for url, status in by_url.items()}
        assert statuses == {"live": "live", "static": "static", "gone": "unreachable"}
        verdict_rows = [json.loads(line) for line in verdicts.read_text().splitlines()]
        live_row = next(r for r in verdict_rows if r["status"] == "live")
        assert live_row["checksum_changed"] is True
        assert len(live_row["samples"]) == 3


class TestCliStages:
    def test_filter_frozen_marks_camera(self, tmp_path):
        from camwatch.cameras import CameraDescriptor, camera_id_for_url, write_descriptors

        urls = ["http://fixtures.camwatch.test/cam-a.jpg",
                "http://fixtures.camwatch.test/cam-b.jpg",
                "http://fixtures.camwatch.test/cam-frozen.jpg"]
        descriptors = [CameraDescriptor.for_url(u, "still", "live") for u in urls]
        cams_file = tmp_path / "cams.jsonl"
        write_descriptors(cams_file, descriptors)
        out = tmp_path / "filtered.jsonl"
        code = main(["filter-frozen", "--cameras", str(cams_file),
                     "--archive", str(FIXTURES / "archive"), "--out", str(out)])
        assert code == 0
        status_by_id = {json.loads(l)["camera_id"]: json.loads(l)["status"]
                        for l in out.read_text().splitlines()}
        assert status_by_id[camera_id_for_url(urls[2])] == "frozen"
        assert status_by_id[camera_id_for_url(urls[0])] == "live"
        assert status_by_id[camera_id_for_url(urls[1])] == "live"

    def test_ingest_counts_and_scenes(self, tmp_path):
        out_dir = tmp_path / "ingest"
        code = main(["--config", str(FIXTURES / "pipeline.json"),
                     "ingest", "--detections", str(FIXTURES / "detections"),
                     "--out", str(out_dir), "--scenes", str(FIXTURES / "scenes.jsonl")])
        assert code == 0
        counts = [json.loads(l) for l in (out_dir / "counts.jsonl").read_text().splitlines()]
        assert counts, "expected counted observations"
        clip_rows = [c for c in counts if c["captured_at"] == "2020-04-02T15:00:00Z"]
        assert len(clip_rows) == 1  # 60 video frames reduced to one clip row
        scenes = {json.loads(l)["camera_id"]: json.loads(l)
                  for l in (out_dir / "scene_assignments.jsonl").read_text().splitlines()}
        highway_cam = next(s for s in scenes.values() if s["primary_scene"] == "highway")
        assert "vehicles" in highway_cam["tasks"]

    def test_distancing_then_groups(self, tmp_path):
        violations = tmp_path / "violations.jsonl"
        code = main(["distancing", "--detections", str(FIXTURES / "detections"),
                     "--out", str(violations)])
        assert code == 0
        with_groups = tmp_path / "groups.jsonl"
        code = main(["groups", "--violations", str(violations), "--out", str(with_groups)])
        assert code == 0
        rows = [json.loads(l) for l in with_groups.read_text().splitlines()]
        assert all("group_lower" in r and "group_upper" in r for r in rows)
        assert all(r["group_lower"] <= r["group_upper"] for r in rows)
        crowd = max(rows, key=lambda r: r["person_count"])
        assert crowd["person_count"] == 45
        assert crowd["violating_people"] >= 2

    def test_report_no_input_fails(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        code = main(["report", "--detections", str(empty),
                     "--regions", str(FIXTURES / "regions.csv"),
                     "--out", str(tmp_path / "out")])
        assert code != 0

    def test_evaluate_cli(self, tmp_path):
        from datetime import datetime, timezone
        from camwatch.detections import (BoundingBox, Detection, FrameDetections,
                                         write_detection_file)

        at = datetime(2020, 4, 1, tzinfo=timezone.utc)
        box = BoundingBox(10, 10, 40, 70)
        pred = FrameDetections(camera_id="c", captured_at=at, image_width=100,
                               image_height=100,
                               detections=(Detection(box=box, class_label="person",
                                                     confidence=0.9),))
        truth_rec = {"camera_id": "c", "captured_at": "2020-04-01T00:00:00Z",
                     "image_width": 100, "image_height": 100,
                     "source": {"kind": "still"},
                     "detections": [{"class": "person", "box": [10, 10, 40, 70],
                                     "confidence": 1.0}]}
        preds_file, truth_file = tmp_path / "p.jsonl", tmp_path / "t.jsonl"
        write_detection_file(preds_file, [pred])
        truth_file.write_text(json.dumps(truth_rec) + "\n")
        out = tmp_path / "eval.json"
        code = main(["evaluate", "--predictions", str(preds_file),
                     "--truth", str(truth_file), "--classes", "person",
                     "--out", str(out)])
        assert code == 0
        result = json.loads(out.read_text())
        assert result["f1"] == 1.0 and result["mean_ap"] == 1.0

    def test_invalid_config_fails_before_work(self, tmp_path):
        bad = write_config(tmp_path, {"captures_per_day": -1})
        code = main(["--config", str(bad), "ingest",
                     "--detections", str(FIXTURES / "detections"),
                     "--out", str(tmp_path / "x")])
        assert code == 2
        assert not (tmp_path / "x").exists()

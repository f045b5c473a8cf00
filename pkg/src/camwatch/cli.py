"""Pipeline command-line interface.

Each subcommand reads its stage's input files and writes its stage's output
files; stages communicate only through those files, so the external detector
can slot between ``archive`` and ``ingest``.
"""

import argparse
import dataclasses
import json
import logging
import sys
from datetime import date, datetime, timezone
from pathlib import Path
from urllib.parse import urlsplit

from . import archiver, cameras, detections, discovery, distancing, evaluation, groups, liveness, reporting
from .config import PipelineConfig, validate_config
from .errors import CamwatchError, InvalidInput
from .images import PixelImage
from .jsonio import parse_date, read_jsonl, write_json, write_jsonl

logger = logging.getLogger(__name__)

_CONTENT_TYPE_EXT = {"image/jpeg": "jpg", "image/png": "png"}


def http_fetch_text(url: str, timeout: float = 15.0) -> str:
    import requests

    resp = requests.get(url, timeout=timeout, headers={"User-Agent": "camwatch/0.1"})
    resp.raise_for_status()
    return resp.text


def http_fetch_bytes(url: str, timeout: float = 15.0) -> bytes:
    if url.startswith("file:"):
        import urllib.request

        with urllib.request.urlopen(url) as fh:
            return fh.read()
    import requests

    resp = requests.get(url, timeout=timeout, headers={"User-Agent": "camwatch/0.1"})
    resp.raise_for_status()
    return resp.content


def make_robots_checker(timeout: float = 5.0):
    import urllib.robotparser

    cache: dict = {}

    def allowed(url: str) -> bool:
        parts = urlsplit(url)
        key = (parts.scheme, parts.netloc)
        if key not in cache:
            parser = urllib.robotparser.RobotFileParser()
            try:
                text = http_fetch_text(f"{parts.scheme}://{parts.netloc}/robots.txt", timeout)
                parser.parse(text.splitlines())
            except Exception:
                parser.parse([])  # unreachable robots.txt: allow
            cache[key] = parser
        return cache[key].can_fetch("camwatch", url)

    return allowed


def _detection_paths(spec_path: str) -> list:
    path = Path(spec_path)
    if path.is_dir():
        return sorted(p for p in path.glob("*.jsonl") if p.is_file())
    if path.is_file():
        return [path]
    return []


def _load_frames(paths, strict: bool = False) -> list:
    frames = []
    for path in paths:
        frames.extend(detections.load_detection_file(path, strict=strict))
    return frames


def _person_frame(frame):
    kept = tuple(d for d in frame.detections
                 if d.class_label.lower() == detections.PERSON_CLASS)
    return dataclasses.replace(frame, detections=kept)


def cmd_discover(args, config: PipelineConfig) -> int:
    seeds_file = args.seeds or config.seeds_path
    if not seeds_file:
        raise InvalidInput("no seeds file given (--seeds or config seeds_path)")
    seeds = [line.strip() for line in Path(seeds_file).read_text().splitlines()
             if line.strip() and not line.startswith("#")]
    budget = discovery.CrawlBudget(max_pages=args.max_pages, max_depth=args.max_depth,
                                   per_host_delay=args.per_host_delay)
    robots = None if args.ignore_robots else make_robots_checker()
    result = discovery.crawl(seeds, budget, http_fetch_text, robots=robots)
    discovery.write_candidates(args.out, result.candidates)
    print(json.dumps({
        "candidates": len(result.candidates),
        "pages_fetched": result.pages_fetched,
        "failures": len(result.failures),
        "out": str(args.out),
    }))
    return 0


def cmd_identify(args, config: PipelineConfig) -> int:
    candidates = discovery.read_candidates(args.candidates)
    live_config = dataclasses.replace(
        config.liveness,
        samples=args.samples if args.samples is not None else config.liveness.samples,
        spacing_seconds=args.spacing if args.spacing is not None else config.liveness.spacing_seconds,
        min_percent=args.min_percent if args.min_percent is not None else config.liveness.min_percent,
        min_luminance=args.min_luminance if args.min_luminance is not None else config.liveness.min_luminance,
    )
    identified = discovery.identify_candidates(candidates, http_fetch_bytes, live_config)
    cameras.write_descriptors(args.out, (item.descriptor for item in identified))
    if args.verdicts:
        discovery.write_verdicts(args.verdicts, identified)
    live = sum(1 for i in identified if i.descriptor.status == cameras.STATUS_LIVE)
    print(json.dumps({"cameras": len(identified), "live": live, "out": str(args.out)}))
    return 0


def cmd_filter_frozen(args, config: PipelineConfig) -> int:
    descriptors = cameras.read_descriptors(args.cameras)
    updated, frozen_count = [], 0
    for descriptor in descriptors:
        if descriptor.status != cameras.STATUS_LIVE:
            updated.append(descriptor)
            continue
        paths = archiver.list_camera_images(args.archive, descriptor.camera_id)
        if len(paths) < 4:
            updated.append(descriptor)
            continue
        sampled = liveness.select_equally_spaced(paths)
        try:
            images = [PixelImage.from_bytes(p.read_bytes()) for p in sampled]
            frozen = liveness.is_frozen(images)
        except CamwatchError as exc:
            logger.warning("frozen check skipped for %s: %s", descriptor.camera_id, exc)
            updated.append(descriptor)
            continue
        if frozen:
            frozen_count += 1
            updated.append(descriptor.with_status(cameras.STATUS_FROZEN))
        else:
            updated.append(descriptor)
    cameras.write_descriptors(args.out, updated)
    print(json.dumps({"cameras": len(updated), "frozen": frozen_count, "out": str(args.out)}))
    return 0


def cmd_schedule(args, config: PipelineConfig) -> int:
    descriptors = cameras.read_descriptors(args.cameras)
    live = [d for d in descriptors if d.status == cameras.STATUS_LIVE]
    day = parse_date(args.day) if args.day else datetime.now(timezone.utc).date()
    jobs = archiver.build_daily_schedule(live, day=day,
                                         captures_per_day=args.per_day or config.captures_per_day,
                                         seed=args.seed)
    archiver.write_schedule(args.out, jobs)
    print(json.dumps({"jobs": len(jobs), "cameras": len(live), "out": str(args.out)}))
    return 0


def cmd_archive(args, config: PipelineConfig) -> int:
    descriptors = cameras.read_descriptors(args.cameras)
    url_by_id = {d.camera_id: d.url for d in descriptors}

    if args.schedule:
        jobs = archiver.read_schedule(args.schedule)
    else:
        live = [d for d in descriptors if d.status == cameras.STATUS_LIVE]
        day = parse_date(args.day) if args.day else datetime.now(timezone.utc).date()
        jobs = archiver.build_daily_schedule(live, day=day,
                                             captures_per_day=args.per_day or config.captures_per_day,
                                             seed=args.seed)

    def fetch(job):
        url = url_by_id.get(job.camera_id)
        if url is None:
            raise InvalidInput(f"no descriptor for camera {job.camera_id}")
        if job.kind == archiver.JOB_CLIP:
            return http_fetch_bytes(url), "mp4"
        data = http_fetch_bytes(url)
        ext = Path(urlsplit(url).path).suffix.lstrip(".").lower() or "jpg"
        return data, {"jpeg": "jpg"}.get(ext, ext)

    summary, _ = archiver.run_archiver(jobs, fetch, args.root or config.archive_root,
                                       parallelism=args.parallelism)
    print(json.dumps({"attempted": summary.attempted, "succeeded": summary.succeeded,
                      "failed": summary.failed}))
    return 0 if summary.failed == 0 else 1


def cmd_ingest(args, config: PipelineConfig) -> int:
    paths = _detection_paths(args.detections)
    if not paths:
        raise InvalidInput(f"no input: no detection files under {args.detections}")
    frames = _load_frames(paths, strict=args.strict)
    threshold = args.confidence if args.confidence is not None else config.confidence_threshold
    counted = reporting.counted_observations(frames, threshold)

    out_dir = Path(args.out)
    write_jsonl(out_dir / "counts.jsonl", (
        {
            "camera_id": c.camera_id,
            "captured_at": c.captured_at.isoformat().replace("+00:00", "Z"),
            "people": c.people,
            "vehicles": c.vehicles,
        }
        for c in counted
    ))
    outputs = {"counts": str(out_dir / "counts.jsonl"), "frames": len(frames),
               "observations": len(counted)}

    if args.scenes:
        assignments = []
        for camera_id, labels in detections.load_scene_file(args.scenes):
            assignment = detections.assign_scene(camera_id, labels,
                                                 vehicle_scenes=config.vehicle_scenes,
                                                 people_scenes=config.people_scenes)
            assignments.append({
                "camera_id": assignment.camera_id,
                "primary_scene": assignment.primary_scene,
                "tasks": sorted(assignment.tasks),
                "labels": [{"scene": s, "confidence": c} for s, c in assignment.labels],
            })
        write_jsonl(out_dir / "scene_assignments.jsonl", assignments)
        outputs["scene_assignments"] = str(out_dir / "scene_assignments.jsonl")

    print(json.dumps(outputs))
    return 0


def cmd_distancing(args, config: PipelineConfig) -> int:
    paths = _detection_paths(args.detections)
    if not paths:
        raise InvalidInput(f"no input: no detection files under {args.detections}")
    frames = _load_frames(paths)
    threshold = args.confidence if args.confidence is not None else config.confidence_threshold
    dist_config = config.distancing
    if args.threshold is not None:
        dist_config = dataclasses.replace(dist_config, violation_threshold=args.threshold)

    reports = []
    for frame in frames:
        filtered = detections.filter_confident(frame, threshold)
        reports.append(distancing.violation_report(_person_frame(filtered), dist_config))
    reports.sort(key=lambda r: (r.camera_id, r.captured_at, r.frame_index or -1))
    distancing.write_violation_file(args.out, reports)
    print(json.dumps({"frames": len(reports),
                      "violating_pairs": sum(r.violating_pairs for r in reports),
                      "out": str(args.out)}))
    return 0


def cmd_groups(args, config: PipelineConfig) -> int:
    loaded = distancing.read_violation_file(args.violations)
    reports = [report for report, _ in loaded]
    bounds = [groups.group_bounds(report) for report in reports]
    distancing.write_violation_file(args.out, reports, group_bounds=bounds)
    print(json.dumps({"frames": len(reports),
                      "max_group_upper": max((b.upper for b in bounds), default=0),
                      "out": str(args.out)}))
    return 0


def cmd_evaluate(args, config: PipelineConfig) -> int:
    class_list = [c.strip() for c in args.classes.split(",") if c.strip()]
    result = evaluation.evaluate(args.predictions, args.truth, class_list,
                                 iou_threshold=args.iou,
                                 operating_confidence=args.confidence)
    record = result.to_record()
    if args.out:
        write_json(args.out, record)
    print(json.dumps(record))
    return 0


def _load_phases(path) -> list:
    import csv as _csv

    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in _csv.DictReader(fh):
            rows.append((row["region"], parse_date(row["start"]),
                         parse_date(row["end"]), row["label"]))
    return rows


def cmd_report(args, config: PipelineConfig) -> int:
    paths = _detection_paths(args.detections)
    if not paths:
        raise InvalidInput(f"no input: no detection files under {args.detections}")
    frames = _load_frames(paths)
    threshold = args.confidence if args.confidence is not None else config.confidence_threshold

    counted = reporting.counted_observations(frames, threshold)
    stats = reporting.daily_camera_max(counted)

    # scene-task masking: a camera only feeds the metrics it was assigned
    if args.scenes:
        tasks_by_camera = {}
        for camera_id, labels in detections.load_scene_file(args.scenes):
            assignment = detections.assign_scene(camera_id, labels,
                                                 vehicle_scenes=config.vehicle_scenes,
                                                 people_scenes=config.people_scenes)
            tasks_by_camera[camera_id] = assignment.tasks
        masked = []
        for stat in stats:
            tasks = tasks_by_camera.get(stat.camera_id)
            if tasks is None:
                masked.append(stat)
                continue
            masked.append(dataclasses.replace(
                stat,
                max_people=stat.max_people if detections.TASK_PEOPLE in tasks else 0,
                max_vehicles=stat.max_vehicles if detections.TASK_VEHICLES in tasks else 0,
            ))
        stats = masked

    region_map = reporting.load_region_map(args.regions, level=args.region_level)
    series = reporting.region_daily_sum(stats, region_map)
    boundaries = reporting.default_week_boundaries(series)
    weekly = [reporting.weekly_max(s, boundaries) for s in series] if boundaries else []
    filtered = reporting.presentation_filter(
        series,
        min_people=args.min_people if args.min_people is not None else config.min_people,
        min_vehicles=args.min_vehicles if args.min_vehicles is not None else config.min_vehicles,
    )

    phases = _load_phases(args.phases) if args.phases else []

    def phase_of(region: str, day: date) -> str:
        for phase_region, start, end, label in phases:
            if phase_region == region and start <= day <= end:
                return label
        return ""

    scatter = {
        s.region: [(d, p, v, phase_of(s.region, d)) for d, p, v in s.points]
        for s in series
    }

    # per-frame distributions behind the histograms
    person_frames = [_person_frame(detections.filter_confident(f, threshold)) for f in frames]
    violation_reports = [distancing.violation_report(f, config.distancing) for f in person_frames]
    bounds = [groups.group_bounds(r) for r in violation_reports]
    histograms = reporting.build_histograms(
        people_counts=[r.person_count for r in violation_reports],
        violating_people_counts=[r.violating_people for r in violation_reports],
        group_lower_bounds=[b.lower for b in bounds],
        group_upper_bounds=[b.upper for b in bounds],
    )

    manifest = reporting.emit_reports(series, histograms, scatter, args.out,
                                      weekly=weekly, filtered=filtered)
    write_json(Path(args.out) / "manifest.json", {"files": manifest})
    print(json.dumps({"regions": len(series), "files": len(manifest) + 1,
                      "out": str(args.out)}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="camwatch",
                                     description="Network-camera analytics pipeline")
    parser.add_argument("--config", help="pipeline config JSON", default=None)
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discover", help="crawl seed pages for camera links")
    p.add_argument("--seeds", default=None)
    p.add_argument("--max-pages", type=int, default=100)
    p.add_argument("--max-depth", type=int, default=1)
    p.add_argument("--per-host-delay", type=float, default=1.0)
    p.add_argument("--ignore-robots", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("identify", help="classify candidate links as live cameras")
    p.add_argument("--candidates", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--verdicts", default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--spacing", type=float, default=None)
    p.add_argument("--min-percent", type=float, default=None)
    p.add_argument("--min-luminance", type=float, default=None)
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("filter-frozen", help="mark cameras whose archive never changes")
    p.add_argument("--cameras", required=True)
    p.add_argument("--archive", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_filter_frozen)

    p = sub.add_parser("schedule", help="build a daily capture schedule")
    p.add_argument("--cameras", required=True)
    p.add_argument("--day", default=None)
    p.add_argument("--per-day", type=int, default=None)
    p.add_argument("--seed", default="0")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("archive", help="capture scheduled snapshots into the archive")
    p.add_argument("--cameras", required=True)
    p.add_argument("--root", default=None)
    p.add_argument("--schedule", default=None)
    p.add_argument("--day", default=None)
    p.add_argument("--per-day", type=int, default=None)
    p.add_argument("--seed", default="0")
    p.add_argument("--parallelism", type=int, default=4)
    p.set_defaults(func=cmd_archive)

    p = sub.add_parser("ingest", help="validate detections and reduce to counts")
    p.add_argument("--detections", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--confidence", type=float, default=None)
    p.add_argument("--scenes", default=None)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("distancing", help="score social-distancing violations")
    p.add_argument("--detections", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--confidence", type=float, default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.set_defaults(func=cmd_distancing)

    p = sub.add_parser("groups", help="append group-size bounds to violation reports")
    p.add_argument("--violations", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_groups)

    p = sub.add_parser("evaluate", help="score detections against ground truth")
    p.add_argument("--predictions", nargs="+", required=True)
    p.add_argument("--truth", nargs="+", required=True)
    p.add_argument("--classes", default="person,car,truck,motorcycle,bus")
    p.add_argument("--iou", type=float, default=0.5)
    p.add_argument("--confidence", type=float, default=0.3)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="aggregate counts into series, histograms, plots")
    p.add_argument("--detections", required=True)
    p.add_argument("--regions", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-people", type=int, default=None)
    p.add_argument("--min-vehicles", type=int, default=None)
    p.add_argument("--confidence", type=float, default=None)
    p.add_argument("--region-level", choices=["country", "state", "city"], default="country")
    p.add_argument("--scenes", default=None)
    p.add_argument("--phases", default=None)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = validate_config(args.config) if args.config else PipelineConfig()
        return args.func(args, config)
    except CamwatchError as exc:
        print(json.dumps({"error": exc.__class__.__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2
    except OSError as exc:
        print(json.dumps({"error": "IoError", "message": str(exc)}), file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

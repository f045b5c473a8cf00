"""Capture scheduling and deterministic on-disk archiving of camera imagery.

Archive layout (bit-exact contract):
    <archive_root>/<camera_id>/<YYYY-MM-DD>/<HHMMSS>.<ext>
with a ``-1``, ``-2``, ... suffix before the extension when two captures for
one camera land on the same second.  All times are UTC.
"""

import errno
import logging
import os
import random
import threading
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from typing import Callable, Optional, Sequence

from .cameras import KIND_VIDEO, CameraDescriptor
from .errors import ArchiveError, InvalidInput
from .jsonio import format_rfc3339, parse_rfc3339, read_jsonl, write_jsonl

logger = logging.getLogger(__name__)

JOB_STILL = "still"
JOB_CLIP = "clip"

DEFAULT_CLIP_SECONDS = 60.0

OUTCOME_STORED = "stored"
OUTCOME_SKIPPED = "skipped"
OUTCOME_FAILED = "failed"


@dataclass(frozen=True)
class CaptureJob:
    camera_id: str
    scheduled_at: datetime
    kind: str = JOB_STILL
    clip_duration: float = DEFAULT_CLIP_SECONDS

    def __post_init__(self):
        if self.kind not in (JOB_STILL, JOB_CLIP):
            raise InvalidInput(f"unknown job kind: {self.kind!r}")
        if self.kind == JOB_CLIP and self.clip_duration <= 0:
            raise InvalidInput("clip_duration must be positive for clip jobs")

    def to_record(self) -> dict:
        rec = {
            "camera_id": self.camera_id,
            "scheduled_at": format_rfc3339(self.scheduled_at),
            "kind": self.kind,
        }
        if self.kind == JOB_CLIP:
            rec["clip_duration"] = self.clip_duration
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "CaptureJob":
        return cls(
            camera_id=rec["camera_id"],
            scheduled_at=parse_rfc3339(rec["scheduled_at"]),
            kind=rec.get("kind", JOB_STILL),
            clip_duration=float(rec.get("clip_duration", DEFAULT_CLIP_SECONDS)),
        )


@dataclass(frozen=True)
class ArchiveRecord:
    camera_id: str
    outcome: str
    path: Optional[str] = None
    byte_size: int = 0
    cause: Optional[str] = None


@dataclass(frozen=True)
class ArchiveSummary:
    attempted: int
    succeeded: int
    failed: int


def build_daily_schedule(cameras: Sequence[CameraDescriptor], day: date,
                         captures_per_day: int = 5, seed=0,
                         clip_duration: float = DEFAULT_CLIP_SECONDS) -> list:
    """Schedule ``captures_per_day`` jobs per camera across the given UTC day.

    The day is split into equal windows and every job gets a seeded uniform
    random offset within its window, so capture times vary day to day while
    staying reproducible.  Video cameras get clip jobs.
    """
    if captures_per_day < 1:
        raise InvalidInput("captures_per_day must be >= 1")

    day_start = datetime(day.year, day.month, day.day, tzinfo=timezone.utc)
    bounds = [round(i * 86400 / captures_per_day) for i in range(captures_per_day + 1)]

    jobs = []
    for camera in cameras:
        # per-camera stream: schedules stay stable under list reordering
        rng = random.Random(f"{seed}:{camera.camera_id}:{day.isoformat()}")
        kind = JOB_CLIP if camera.kind == KIND_VIDEO else JOB_STILL
        for lo, hi in zip(bounds, bounds[1:]):
            offset = rng.randrange(lo, hi)
            jobs.append(CaptureJob(
                camera_id=camera.camera_id,
                scheduled_at=day_start + timedelta(seconds=offset),
                kind=kind,
                clip_duration=clip_duration,
            ))
    return jobs


def job_path_stem(archive_root, job: CaptureJob) -> Path:
    """Directory/basename (no extension) a job's capture will be stored under."""
    at = job.scheduled_at.astimezone(timezone.utc)
    return Path(archive_root) / job.camera_id / at.strftime("%Y-%m-%d") / at.strftime("%H%M%S")


def execute_job(job: CaptureJob, fetcher: Callable[[CaptureJob], tuple],
                archive_root) -> ArchiveRecord:
    """Fetch one capture and store it under the deterministic layout.

    ``fetcher(job)`` returns (data_bytes, extension).  Fetch failures are
    recorded as a failed outcome; storage failures (e.g. disk full) raise
    ArchiveError.  Writes go to a temp name and are renamed on completion so
    partial files are never left behind.
    """
    try:
        data, ext = fetcher(job)
    except Exception as exc:
        cause = str(exc) or exc.__class__.__name__
        logger.warning("capture failed for %s: %s", job.camera_id, cause)
        return ArchiveRecord(camera_id=job.camera_id, outcome=OUTCOME_FAILED, cause=cause)

    stem = job_path_stem(archive_root, job)
    ext = ext.lstrip(".")
    try:
        stem.parent.mkdir(parents=True, exist_ok=True)
        target = stem.with_name(f"{stem.name}.{ext}")
        suffix = 0
        while target.exists():
            suffix += 1
            target = stem.with_name(f"{stem.name}-{suffix}.{ext}")
        tmp = target.with_name(target.name + ".part")
        try:
            with open(tmp, "wb") as fh:
                fh.write(data)
            os.replace(tmp, target)
        except BaseException:
            tmp.unlink(missing_ok=True)
            raise
    except OSError as exc:
        if exc.errno == errno.ENOSPC:
            raise ArchiveError(f"disk full while writing {stem}") from exc
        raise ArchiveError(f"cannot write capture under {archive_root}: {exc}") from exc

    return ArchiveRecord(camera_id=job.camera_id, outcome=OUTCOME_STORED,
                         path=str(target), byte_size=len(data))


def run_archiver(schedule: Sequence[CaptureJob], fetcher, archive_root,
                 parallelism: int = 4) -> tuple:
    """Execute all jobs with a bounded worker pool.

    At most ``parallelism`` fetches run concurrently and each camera's jobs
    run strictly in order (one in-flight fetch per camera).  Jobs whose
    archive path already exists are skipped without fetching, so re-running a
    completed schedule performs no duplicate fetches.

    Returns (ArchiveSummary, list of ArchiveRecord).
    """
    if parallelism < 1:
        raise InvalidInput("parallelism must be >= 1")

    by_camera: dict[str, list] = {}
    for job in schedule:
        by_camera.setdefault(job.camera_id, []).append(job)

    records: list = []
    records_lock = threading.Lock()

    def run_camera(jobs: list) -> None:
        for job in jobs:
            stem = job_path_stem(archive_root, job)
            existing = list(stem.parent.glob(stem.name + ".*")) if stem.parent.is_dir() else []
            existing = [p for p in existing if not p.name.endswith(".part")]
            if existing:
                record = ArchiveRecord(camera_id=job.camera_id, outcome=OUTCOME_SKIPPED,
                                       path=str(existing[0]))
            else:
                record = execute_job(job, fetcher, archive_root)
            with records_lock:
                records.append(record)

    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        futures = [pool.submit(run_camera, jobs) for jobs in by_camera.values()]
        for future in as_completed(futures):
            future.result()  # surface ArchiveError

    succeeded = sum(1 for r in records if r.outcome in (OUTCOME_STORED, OUTCOME_SKIPPED))
    failed = sum(1 for r in records if r.outcome == OUTCOME_FAILED)
    summary = ArchiveSummary(attempted=len(schedule), succeeded=succeeded, failed=failed)
    return summary, records


def list_camera_images(archive_root, camera_id: str) -> list:
    """All archived still paths for one camera, chronologically ordered."""
    camera_dir = Path(archive_root) / camera_id
    if not camera_dir.is_dir():
        return []
    paths = [
        p for p in camera_dir.glob("*/*")
        if p.is_file() and p.suffix.lower() in (".jpg", ".jpeg", ".png")
    ]
    # zero-padded layout makes the lexical order the chronological order
    return sorted(paths)


def write_schedule(path, jobs: Sequence[CaptureJob]) -> None:
    write_jsonl(path, (j.to_record() for j in jobs))


def read_schedule(path) -> list:
    return [CaptureJob.from_record(rec) for _, rec in read_jsonl(path)]

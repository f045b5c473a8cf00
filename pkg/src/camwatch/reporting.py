"""Reduction of per-frame counts into daily maxima, region series, histograms,
and emitted CSV/plot files.

The smoothing reduction is: per camera per UTC day, keep the maximum count
(night frames with zero detections then never drag a day down); per region
per day, sum those maxima over cameras that have data that day.  Missing
camera-days contribute nothing rather than zero.
"""

import csv
import logging
import re
from collections import defaultdict
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .detections import (
    DEFAULT_CONFIDENCE,
    SOURCE_VIDEO,
    FrameDetections,
    clip_person_count,
    clip_vehicle_count,
    count_people,
    count_vehicles,
    filter_confident,
)
from .errors import InvalidInput

logger = logging.getLogger(__name__)

DEFAULT_MIN_PEOPLE = 40
DEFAULT_MIN_VEHICLES = 50

METRIC_PEOPLE = "people"
METRIC_VEHICLES = "vehicles"

HISTOGRAM_MAX_BIN = 100


@dataclass(frozen=True)
class CountedFrame:
    """One counted observation: a still image or a whole reduced video clip."""

    camera_id: str
    captured_at: datetime
    people: int
    vehicles: int


@dataclass(frozen=True)
class DailyCameraStat:
    camera_id: str
    date: date
    max_people: int
    max_vehicles: int
    observations: int

    def __post_init__(self):
        if self.observations < 1:
            raise InvalidInput("an emitted stat needs at least one observation")


@dataclass(frozen=True)
class RegionSeries:
    region: str
    points: tuple  # ordered (date, people_sum, vehicles_sum)

    def __post_init__(self):
        dates = [p[0] for p in self.points]
        if any(b <= a for a, b in zip(dates, dates[1:])):
            raise InvalidInput(f"series dates must be strictly increasing: {self.region}")


@dataclass(frozen=True)
class MetricSeries:
    region: str
    metric: str
    points: tuple  # ordered (date, value)


@dataclass(frozen=True)
class HistogramSpec:
    name: str
    bins: tuple    # half-open integer ranges (start, end), ascending
    counts: tuple

    def __post_init__(self):
        if len(self.bins) != len(self.counts):
            raise InvalidInput("bins and counts must align")
        for (a0, a1), (b0, b1) in zip(self.bins, self.bins[1:]):
            if a1 > b0:
                raise InvalidInput("bins must be non-overlapping and ascending")

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def zero_count(self) -> int:
        for (start, end), count in zip(self.bins, self.counts):
            if start <= 0 < end:
                return count
        return 0

    def range_counts(self, lo: int, hi: int) -> list:
        """Per-bin (start, count) rows for bins whose start lies in [lo, hi]."""
        return [(start, count) for (start, _), count in zip(self.bins, self.counts)
                if lo <= start <= hi]


def counted_observations(frames: Sequence[FrameDetections],
                         threshold: float = DEFAULT_CONFIDENCE) -> list:
    """Confidence-filter frames and reduce them to counted observations.

    Still frames count directly; all sampled frames of one video clip
    (same camera and capture time) reduce to a single observation carrying
    the clip maximum.
    """
    counted = []
    clips: dict = defaultdict(list)
    for frame in frames:
        filtered = filter_confident(frame, threshold)
        if frame.source_kind == SOURCE_VIDEO:
            clips[(frame.camera_id, frame.captured_at)].append(filtered)
        else:
            counted.append(CountedFrame(
                camera_id=frame.camera_id, captured_at=frame.captured_at,
                people=count_people(filtered), vehicles=count_vehicles(filtered)))

    for (camera_id, captured_at), clip_frames in clips.items():
        counted.append(CountedFrame(
            camera_id=camera_id, captured_at=captured_at,
            people=clip_person_count(clip_frames),
            vehicles=clip_vehicle_count(clip_frames)))

    counted.sort(key=lambda c: (c.camera_id, c.captured_at))
    return counted


def daily_camera_max(counts: Sequence[CountedFrame]) -> list:
    """One stat per (camera, UTC date): the maximum observed counts that day."""
    grouped: dict = defaultdict(list)
    for item in counts:
        grouped[(item.camera_id, item.captured_at.date())].append(item)

    stats = [
        DailyCameraStat(
            camera_id=camera_id, date=day,
            max_people=max(i.people for i in items),
            max_vehicles=max(i.vehicles for i in items),
            observations=len(items),
        )
        for (camera_id, day), items in grouped.items()
    ]
    stats.sort(key=lambda s: (s.camera_id, s.date))
    return stats


def region_daily_sum(stats: Sequence[DailyCameraStat], region_of: dict) -> list:
    """Per region per day, the sum of the cameras' daily maxima.

    Cameras missing from the mapping are reported and excluded.  Dates with
    no data for a region are omitted, not zero-filled.
    """
    unmapped = sorted({s.camera_id for s in stats if s.camera_id not in region_of})
    if unmapped:
        logger.warning("no region mapping for %d camera(s): %s", len(unmapped), ", ".join(unmapped))

    sums: dict = defaultdict(lambda: defaultdict(lambda: [0, 0]))
    for stat in stats:
        region = region_of.get(stat.camera_id)
        if region is None:
            continue
        cell = sums[region][stat.date]
        cell[0] += stat.max_people
        cell[1] += stat.max_vehicles

    series = [
        RegionSeries(region=region, points=tuple(
            (day, people, vehicles)
            for day, (people, vehicles) in sorted(by_date.items())
        ))
        for region, by_date in sums.items()
    ]
    series.sort(key=lambda s: s.region)
    return series


def default_week_boundaries(series: Sequence[RegionSeries], days: int = 7) -> list:
    """Window starts every ``days`` from the earliest date, covering the latest."""
    dates = [p[0] for s in series for p in s.points]
    if not dates:
        return []
    start, last = min(dates), max(dates)
    boundaries = []
    current = start
    while current <= last:
        boundaries.append(current)
        current += timedelta(days=days)
    boundaries.append(current)  # close the final window
    return boundaries


def weekly_max(series: RegionSeries, week_boundaries: Sequence[date]) -> RegionSeries:
    """Reduce a daily series to per-window maxima; empty windows are omitted."""
    if any(b <= a for a, b in zip(week_boundaries, week_boundaries[1:])):
        raise InvalidInput("week boundaries must be ascending")
    points = []
    for lo, hi in zip(week_boundaries, week_boundaries[1:]):
        in_window = [p for p in series.points if lo <= p[0] < hi]
        if not in_window:
            continue
        points.append((lo,
                       max(p[1] for p in in_window),
                       max(p[2] for p in in_window)))
    return RegionSeries(region=series.region, points=tuple(points))


def presentation_filter(series_set: Sequence[RegionSeries],
                        min_people: int = DEFAULT_MIN_PEOPLE,
                        min_vehicles: int = DEFAULT_MIN_VEHICLES) -> list:
    """Split series per metric, keeping only regions whose all-time max reaches
    the floor.  Individual days are never filtered, only whole series."""
    kept = []
    for series in series_set:
        if not series.points:
            continue
        if max(p[1] for p in series.points) >= min_people:
            kept.append(MetricSeries(
                region=series.region, metric=METRIC_PEOPLE,
                points=tuple((p[0], p[1]) for p in series.points)))
        if max(p[2] for p in series.points) >= min_vehicles:
            kept.append(MetricSeries(
                region=series.region, metric=METRIC_VEHICLES,
                points=tuple((p[0], p[2]) for p in series.points)))
    return kept


def _dense_histogram(name: str, values: Iterable[int]) -> HistogramSpec:
    values = list(values)
    top = max([HISTOGRAM_MAX_BIN] + values) if values else HISTOGRAM_MAX_BIN
    counts = [0] * (top + 1)
    for v in values:
        if v < 0:
            raise InvalidInput(f"negative count in histogram {name}: {v}")
        counts[v] += 1
    bins = tuple((v, v + 1) for v in range(top + 1))
    return HistogramSpec(name=name, bins=bins, counts=tuple(counts))


def build_histograms(people_counts: Sequence[int],
                     violating_people_counts: Sequence[int],
                     group_lower_bounds: Sequence[int],
                     group_upper_bounds: Sequence[int]) -> dict:
    """Integer histograms for the four per-frame quantities.

    Bins are unit-width; presentation splits them into the 1-10 and 11-100
    ranges with the zero bin tallied separately (zero-count frames dominate
    and are not drawn).
    """
    return {
        "people": _dense_histogram("people", people_counts),
        "violating_people": _dense_histogram("violating_people", violating_people_counts),
        "group_lower": _dense_histogram("group_lower", group_lower_bounds),
        "group_upper": _dense_histogram("group_upper", group_upper_bounds),
    }


def _slug(text: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-")
    return slug or "region"


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _setup_matplotlib():
    import matplotlib
    matplotlib.use("Agg")
    # fixed hash salt keeps SVG element ids identical across runs
    matplotlib.rcParams["svg.hashsalt"] = "camwatch"
    import matplotlib.pyplot as plt
    return plt


def emit_reports(series: Sequence[RegionSeries], histograms: dict,
                 scatter: dict, out_dir,
                 weekly: Optional[Sequence[RegionSeries]] = None,
                 filtered: Optional[Sequence[MetricSeries]] = None) -> list:
    """Write CSVs and SVG plots; returns the manifest of paths relative to out_dir.

    Output is deterministic: stable ordering everywhere and no embedded
    timestamps, so identical inputs produce byte-identical files.
    """
    out_dir = Path(out_dir)
    plt = _setup_matplotlib()
    manifest = []

    def save_plot(fig, rel: str) -> None:
        path = out_dir / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        manifest.append(rel)

    for s in sorted(series, key=lambda s: s.region):
        slug = _slug(s.region)
        rel = f"csv/series_{slug}.csv"
        _write_csv(out_dir / rel, ["date", "people_sum", "vehicles_sum"],
                   ((d.isoformat(), p, v) for d, p, v in s.points))
        manifest.append(rel)

        fig, ax = plt.subplots(figsize=(8, 4))
        dates = [d for d, _, _ in s.points]
        ax.plot(dates, [p for _, p, _ in s.points], label="people", marker="o")
        ax.plot(dates, [v for _, _, v in s.points], label="vehicles", marker="s")
        ax.set_title(f"Daily counts: {s.region}")
        ax.set_xlabel("date")
        ax.set_ylabel("summed daily maxima")
        ax.legend()
        fig.autofmt_xdate()
        save_plot(fig, f"plots/series_{slug}.svg")

    for s in sorted(weekly or [], key=lambda s: s.region):
        slug = _slug(s.region)
        rel = f"csv/weekly_{slug}.csv"
        _write_csv(out_dir / rel, ["week_start", "people_max", "vehicles_max"],
                   ((d.isoformat(), p, v) for d, p, v in s.points))
        manifest.append(rel)

    for region in sorted(scatter):
        slug = _slug(region)
        rows = scatter[region]
        rel = f"csv/scatter_{slug}.csv"
        _write_csv(out_dir / rel, ["date", "people_sum", "vehicles_sum", "phase_label"],
                   ((d.isoformat(), p, v, label) for d, p, v, label in rows))
        manifest.append(rel)

        fig, ax = plt.subplots(figsize=(5, 5))
        labels = sorted({label for _, _, _, label in rows})
        for label in labels:
            xs = [p for _, p, _, l in rows if l == label]
            ys = [v for _, _, v, l in rows if l == label]
            ax.scatter(xs, ys, label=label or "unlabeled", alpha=0.7)
        ax.set_title(f"People vs vehicles: {region}")
        ax.set_xlabel("people")
        ax.set_ylabel("vehicles")
        ax.legend()
        save_plot(fig, f"plots/scatter_{slug}.svg")

    if filtered is not None:
        rel = "csv/filtered_series.csv"
        rows = [
            (s.region, s.metric, d.isoformat(), value)
            for s in sorted(filtered, key=lambda s: (s.region, s.metric))
            for d, value in s.points
        ]
        _write_csv(out_dir / rel, ["region", "metric", "date", "value"], rows)
        manifest.append(rel)

    for name in sorted(histograms):
        hist = histograms[name]
        rel = f"csv/hist_{name}.csv"
        _write_csv(out_dir / rel, ["bin_start", "bin_end", "count"],
                   ((start, end, count) for (start, end), count in zip(hist.bins, hist.counts)))
        manifest.append(rel)

        fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
        low = hist.range_counts(1, 10)
        high = hist.range_counts(11, HISTOGRAM_MAX_BIN)
        left.bar([s for s, _ in low], [c for _, c in low])
        left.set_title(f"{name}: 1-10")
        right.bar([s for s, _ in high], [c for _, c in high], width=1.0)
        right.set_title(f"{name}: 11-{HISTOGRAM_MAX_BIN}")
        for ax in (left, right):
            ax.set_xlabel("count per image")
            ax.set_ylabel("images")
        fig.tight_layout()
        save_plot(fig, f"plots/hist_{name}.svg")

    ordered = sorted(manifest)
    if len(ordered) != len(set(ordered)):
        raise InvalidInput("duplicate output path in report manifest")
    return ordered


def load_region_map(path, level: str = "country") -> dict:
    """Read the camera->region CSV (camera_id,country,state,city) at a granularity."""
    if level not in ("country", "state", "city"):
        raise InvalidInput(f"unknown region level: {level!r}")
    mapping = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            camera_id = (row.get("camera_id") or "").strip()
            if not camera_id:
                continue
            country = (row.get("country") or "").strip()
            state = (row.get("state") or "").strip()
            city = (row.get("city") or "").strip()
            if level == "country":
                region = country
            elif level == "state":
                region = "/".join(x for x in (country, state) if x)
            else:
                region = "/".join(x for x in (country, state, city) if x)
            if region:
                mapping[camera_id] = region
    return mapping

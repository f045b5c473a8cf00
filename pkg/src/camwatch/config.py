"""Pipeline configuration: one JSON file, validated up front.

Relative paths resolve against the config file's directory.  Top-level
scalar keys can be overridden with ``CAMWATCH_<KEY>`` environment variables
(e.g. ``CAMWATCH_CAPTURES_PER_DAY=3``).
"""

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .distancing import DistancingConfig
from .errors import ConfigError
from .liveness import LivenessConfig

logger = logging.getLogger(__name__)

ENV_PREFIX = "CAMWATCH_"

_KNOWN_KEYS = {
    "seeds_path", "archive_root", "captures_per_day", "liveness", "distancing",
    "scenes", "presentation", "region_map_path", "output_dir",
    "confidence_threshold", "frame_stride",
}


@dataclass(frozen=True)
class PipelineConfig:
    seeds_path: Optional[Path] = None
    archive_root: Path = Path("archive")
    captures_per_day: int = 5
    liveness: LivenessConfig = field(default_factory=LivenessConfig)
    distancing: DistancingConfig = field(default_factory=DistancingConfig)
    vehicle_scenes: frozenset = frozenset({"highway", "road"})
    people_scenes: frozenset = frozenset()
    min_people: int = 40
    min_vehicles: int = 50
    region_map_path: Optional[Path] = None
    output_dir: Path = Path("out")
    confidence_threshold: float = 0.3
    frame_stride: int = 30


def _apply_env_overrides(raw: dict) -> dict:
    for key in list(_KNOWN_KEYS):
        env_key = ENV_PREFIX + key.upper()
        if env_key not in os.environ:
            continue
        value = os.environ[env_key]
        if key in ("captures_per_day", "frame_stride"):
            raw[key] = int(value)
        elif key == "confidence_threshold":
            raw[key] = float(value)
        elif key in ("liveness", "distancing", "scenes", "presentation"):
            raw[key] = json.loads(value)
        else:
            raw[key] = value
    return raw


def validate_config(path) -> PipelineConfig:
    """Load and validate a config file; every violation is reported at once."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError([f"cannot read config: {exc}"]) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config is not valid JSON: {exc}"]) from exc
    if not isinstance(raw, dict):
        raise ConfigError(["config root must be a JSON object"])

    raw = _apply_env_overrides(dict(raw))
    base = path.parent
    problems = []

    for key in raw:
        if key not in _KNOWN_KEYS:
            logger.warning("unknown config key %r ignored", key)

    def get_section(name):
        section = raw.get(name, {})
        if not isinstance(section, dict):
            problems.append(f"{name}: must be an object")
            return {}
        return section

    def number(section, sec_name, key, default, minimum=None, maximum=None, integer=False):
        value = section.get(key, default)
        label = f"{sec_name}.{key}" if sec_name else key
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            problems.append(f"{label}: must be a number, got {value!r}")
            return default
        if integer and int(value) != value:
            problems.append(f"{label}: must be an integer, got {value!r}")
            return default
        if minimum is not None and value < minimum:
            problems.append(f"{label}: must be >= {minimum}, got {value}")
            return default
        if maximum is not None and value > maximum:
            problems.append(f"{label}: must be <= {maximum}, got {value}")
            return default
        return int(value) if integer else float(value)

    captures_per_day = number(raw, "", "captures_per_day", 5, minimum=1, integer=True)
    confidence = number(raw, "", "confidence_threshold", 0.3, minimum=0.0, maximum=1.0)
    frame_stride = number(raw, "", "frame_stride", 30, minimum=1, integer=True)

    live_raw = get_section("liveness")
    liveness = LivenessConfig(
        min_percent=number(live_raw, "liveness", "min_percent", 0.001, minimum=0.0, maximum=1.0),
        min_luminance=number(live_raw, "liveness", "min_luminance", 1.0, minimum=0.0),
        channel_tolerance=number(live_raw, "liveness", "channel_tolerance", 0, minimum=0, integer=True),
        samples=number(live_raw, "liveness", "samples", 3, minimum=2, integer=True),
        spacing_seconds=number(live_raw, "liveness", "spacing_seconds", 10.0, minimum=0.0),
    )

    dist_raw = get_section("distancing")
    threshold = dist_raw.get("violation_threshold")
    if threshold is not None:
        threshold = number(dist_raw, "distancing", "violation_threshold", None, minimum=1e-9)
    distancing = DistancingConfig(
        assumed_height_ft=number(dist_raw, "distancing", "assumed_height_ft", 5.4, minimum=1e-9),
        distance_ft=number(dist_raw, "distancing", "distance_ft", 6.0, minimum=1e-9),
        violation_threshold=threshold,
    )

    scenes_raw = get_section("scenes")
    vehicle_scenes = scenes_raw.get("vehicle_scenes", ["highway", "road"])
    people_scenes = scenes_raw.get("people_scenes", [])
    for name, value in (("vehicle_scenes", vehicle_scenes), ("people_scenes", people_scenes)):
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            problems.append(f"scenes.{name}: must be a list of strings")

    pres_raw = get_section("presentation")
    min_people = number(pres_raw, "presentation", "min_people", 40, minimum=0, integer=True)
    min_vehicles = number(pres_raw, "presentation", "min_vehicles", 50, minimum=0, integer=True)

    def resolve(key, default=None):
        value = raw.get(key)
        if value is None:
            return default
        if not isinstance(value, str) or not value:
            problems.append(f"{key}: must be a non-empty string path")
            return default
        return (base / value).resolve()

    seeds_path = resolve("seeds_path")
    region_map_path = resolve("region_map_path")
    archive_root = resolve("archive_root", (base / "archive").resolve())
    output_dir = resolve("output_dir", (base / "out").resolve())

    if problems:
        raise ConfigError(problems)

    return PipelineConfig(
        seeds_path=seeds_path,
        archive_root=archive_root,
        captures_per_day=captures_per_day,
        liveness=liveness,
        distancing=distancing,
        vehicle_scenes=frozenset(s.lower() for s in vehicle_scenes),
        people_scenes=frozenset(s.lower() for s in people_scenes),
        min_people=min_people,
        min_vehicles=min_vehicles,
        region_map_path=region_map_path,
        output_dir=output_dir,
        confidence_threshold=confidence,
        frame_stride=frame_stride,
    )

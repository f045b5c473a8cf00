"""Camera identity and descriptor records shared by discovery and archiving."""

import hashlib
from dataclasses import dataclass, field, replace
from typing import Optional
from urllib.parse import urlsplit, urlunsplit

from .errors import InvalidInput
from .jsonio import read_jsonl, write_jsonl

KIND_STILL = "still"
KIND_VIDEO = "video"

STATUS_LIVE = "live"
STATUS_STATIC = "static"
STATUS_FROZEN = "frozen"
STATUS_UNREACHABLE = "unreachable"

_STATUSES = {STATUS_LIVE, STATUS_STATIC, STATUS_FROZEN, STATUS_UNREACHABLE}
_KINDS = {KIND_STILL, KIND_VIDEO}


def canonical_url(url: str) -> str:
    """Normalize a URL: lowercase scheme/host, drop fragment and default port."""
    parts = urlsplit(url)
    if not parts.scheme or not parts.netloc:
        raise InvalidInput(f"not an absolute URL: {url!r}")
    host = parts.hostname or ""
    port = parts.port
    default_port = {"http": 80, "https": 443, "rtsp": 554}.get(parts.scheme.lower())
    netloc = host.lower()
    if port is not None and port != default_port:
        netloc += f":{port}"
    return urlunsplit((parts.scheme.lower(), netloc, parts.path, parts.query, ""))


def camera_id_for_url(url: str) -> str:
    """Stable opaque id: truncated hex digest of the canonical URL."""
    canon = canonical_url(url)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class CameraDescriptor:
    camera_id: str
    url: str
    kind: str
    status: str
    scene: Optional[str] = None
    country: Optional[str] = None
    city: Optional[str] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidInput(f"unknown camera kind: {self.kind!r}")
        if self.status not in _STATUSES:
            raise InvalidInput(f"unknown camera status: {self.status!r}")

    @classmethod
    def for_url(cls, url: str, kind: str, status: str, **extra) -> "CameraDescriptor":
        return cls(camera_id=camera_id_for_url(url), url=canonical_url(url),
                   kind=kind, status=status, **extra)

    def with_status(self, status: str) -> "CameraDescriptor":
        return replace(self, status=status)

    def to_record(self) -> dict:
        rec = {
            "camera_id": self.camera_id,
            "url": self.url,
            "kind": self.kind,
            "status": self.status,
        }
        for key in ("scene", "country", "city"):
            value = getattr(self, key)
            if value is not None:
                rec[key] = value
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "CameraDescriptor":
        return cls(
            camera_id=rec["camera_id"],
            url=rec["url"],
            kind=rec["kind"],
            status=rec["status"],
            scene=rec.get("scene"),
            country=rec.get("country"),
            city=rec.get("city"),
        )


def write_descriptors(path, descriptors) -> None:
    write_jsonl(path, (d.to_record() for d in descriptors))


def read_descriptors(path) -> list:
    return [CameraDescriptor.from_record(rec) for _, rec in read_jsonl(path)]

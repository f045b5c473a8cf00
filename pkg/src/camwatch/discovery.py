"""Seed-page crawling and candidate camera link extraction.

Static HTML parsing only: pages are not rendered, so assets injected by
scripts at load time are missed.  Stream URLs that appear as raw text in
scripts are still picked up by the regex scan.
"""

import logging
import re
import time
from collections import deque
from dataclasses import dataclass, field
from datetime import datetime, timezone
from html.parser import HTMLParser
from typing import Callable, Optional, Sequence
from urllib.parse import urljoin, urlsplit

from .cameras import (
    KIND_STILL,
    KIND_VIDEO,
    STATUS_LIVE,
    STATUS_STATIC,
    STATUS_UNREACHABLE,
    CameraDescriptor,
)
from .errors import CrawlFailed, InsufficientSamples, InvalidInput
from .jsonio import format_rfc3339, parse_rfc3339, read_jsonl, write_jsonl
from .liveness import LivenessConfig, LivenessVerdict, classify_liveness, retrieval_from_bytes

logger = logging.getLogger(__name__)

KIND_STILL_IMAGE = "still_image"
KIND_VIDEO_STREAM = "video_stream"

_IMAGE_EXTENSIONS = (".jpg", ".jpeg", ".png")
_STREAM_SCHEMES = ("rtmp", "rtsp")

# bare stream URLs often sit in script blocks rather than attributes
_RAW_URL_RE = re.compile(r"""(?:rtmp|rtsp)://[^\s"'<>]+|https?://[^\s"'<>]+?\.mjpg\b""", re.IGNORECASE)


@dataclass(frozen=True)
class CandidateLink:
    url: str
    kind: str
    source_page: str
    discovered_at: datetime

    def to_record(self) -> dict:
        return {
            "url": self.url,
            "kind": self.kind,
            "source_page": self.source_page,
            "discovered_at": format_rfc3339(self.discovered_at),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "CandidateLink":
        return cls(
            url=rec["url"],
            kind=rec["kind"],
            source_page=rec["source_page"],
            discovered_at=parse_rfc3339(rec["discovered_at"]),
        )


@dataclass(frozen=True)
class CrawlBudget:
    max_pages: int = 100
    max_depth: int = 1
    per_host_delay: float = 1.0

    def __post_init__(self):
        if self.max_pages < 1:
            raise InvalidInput("max_pages must be >= 1")
        if self.max_depth < 0:
            raise InvalidInput("max_depth must be >= 0")
        if self.per_host_delay < 0:
            raise InvalidInput("per_host_delay must be >= 0")


@dataclass
class CrawlResult:
    candidates: list
    failures: dict = field(default_factory=dict)
    pages_fetched: int = 0


def classify_candidate_url(url: str) -> Optional[str]:
    """Candidate kind for a URL, or None when it matches no camera pattern."""
    try:
        parts = urlsplit(url)
    except ValueError:
        return None
    scheme = parts.scheme.lower()
    path = parts.path.lower()
    if scheme in _STREAM_SCHEMES or path.endswith(".mjpg"):
        return KIND_VIDEO_STREAM
    if scheme in ("http", "https") and path.endswith(_IMAGE_EXTENSIONS):
        return KIND_STILL_IMAGE
    return None


class _LinkCollector(HTMLParser):
    """Collects href/src attribute values; tolerant of malformed markup."""

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.assets = []      # any href/src value, candidate patterns applied later
        self.hyperlinks = []  # <a>/<area> href values, used for traversal

    def handle_starttag(self, tag, attrs):
        for name, value in attrs:
            if value is None:
                continue
            if name in ("href", "src"):
                self.assets.append(value)
                if name == "href" and tag in ("a", "area"):
                    self.hyperlinks.append(value)


def _parse_page(html: str, page_url: str) -> tuple[list, list]:
    """Return (candidate_urls, hyperlink_urls), resolved and de-duplicated."""
    parts = urlsplit(page_url)
    if not parts.scheme or not parts.netloc:
        raise InvalidInput(f"page_url must be absolute: {page_url!r}")

    collector = _LinkCollector()
    try:
        collector.feed(html)
        collector.close()
    except Exception:
        # malformed fragments are skipped, never fatal
        logger.debug("html parse aborted early for %s", page_url)

    raw_refs = list(collector.assets) + _RAW_URL_RE.findall(html)

    candidates, seen = [], set()
    for ref in raw_refs:
        try:
            resolved = urljoin(page_url, ref.strip())
        except ValueError:
            continue
        kind = classify_candidate_url(resolved)
        if kind is None or resolved in seen:
            continue
        seen.add(resolved)
        candidates.append((resolved, kind))

    hyperlinks, seen_links = [], set()
    for ref in collector.hyperlinks:
        try:
            resolved = urljoin(page_url, ref.strip())
        except ValueError:
            continue
        resolved = resolved.split("#", 1)[0]
        if not resolved or resolved in seen_links:
            continue
        if urlsplit(resolved).scheme not in ("http", "https"):
            continue
        seen_links.add(resolved)
        hyperlinks.append(resolved)

    return candidates, hyperlinks


def extract_candidate_links(html: str, page_url: str,
                            now: Optional[datetime] = None) -> list:
    """Extract camera-pattern links (still images, rtmp/rtsp/.mjpg streams) from a page."""
    discovered_at = now or datetime.now(timezone.utc)
    candidates, _ = _parse_page(html, page_url)
    return [
        CandidateLink(url=url, kind=kind, source_page=page_url, discovered_at=discovered_at)
        for url, kind in candidates
    ]


def _registrable_domain(host: str) -> str:
    # coarse approximation (no public-suffix list): last two labels
    labels = host.lower().split(".")
    if len(labels) <= 2 or labels[-1].isdigit():
        return host.lower()
    return ".".join(labels[-2:])


def crawl(seeds: Sequence[str], budget: CrawlBudget,
          fetcher: Callable[[str], str],
          robots: Optional[Callable[[str], bool]] = None,
          now: Optional[datetime] = None,
          sleep: Callable[[float], None] = time.sleep) -> CrawlResult:
    """Breadth-first crawl of the seeds' registrable domains.

    Follows hyperlinks up to ``max_depth`` and ``max_pages``, returning the
    union of candidate links over all fetched pages.  Fetch failures are
    recorded per URL and never fatal; only all seeds failing raises
    CrawlFailed.  Requests to one host are separated by ``per_host_delay``.
    """
    if not seeds:
        raise InvalidInput("seeds must be non-empty")

    allowed_domains = set()
    for seed in seeds:
        parts = urlsplit(seed)
        if not parts.scheme or not parts.hostname:
            raise InvalidInput(f"seed is not an absolute URL: {seed!r}")
        allowed_domains.add(_registrable_domain(parts.hostname))

    discovered_at = now or datetime.now(timezone.utc)
    frontier = deque((seed, 0) for seed in seeds)
    enqueued = set(seeds)
    last_fetch: dict[str, float] = {}
    result = CrawlResult(candidates=[])
    candidate_urls: set[str] = set()
    seed_failures: dict[str, str] = {}
    any_seed_fetched = False

    while frontier and result.pages_fetched < budget.max_pages:
        url, depth = frontier.popleft()
        host = urlsplit(url).hostname or ""

        if robots is not None and not robots(url):
            result.failures[url] = "disallowed by robots.txt"
            continue

        if budget.per_host_delay > 0 and host in last_fetch:
            elapsed = time.monotonic() - last_fetch[host]
            if elapsed < budget.per_host_delay:
                sleep(budget.per_host_delay - elapsed)

        last_fetch[host] = time.monotonic()
        result.pages_fetched += 1
        try:
            html = fetcher(url)
        except Exception as exc:
            result.failures[url] = str(exc) or exc.__class__.__name__
            if depth == 0:
                seed_failures[url] = result.failures[url]
            logger.warning("fetch failed for %s: %s", url, result.failures[url])
            continue

        if depth == 0:
            any_seed_fetched = True

        try:
            page_candidates, hyperlinks = _parse_page(html, url)
        except InvalidInput:
            result.failures[url] = "unparseable page URL"
            continue

        for cand_url, kind in page_candidates:
            if cand_url in candidate_urls:
                continue
            candidate_urls.add(cand_url)
            result.candidates.append(CandidateLink(
                url=cand_url, kind=kind, source_page=url, discovered_at=discovered_at))

        if depth < budget.max_depth:
            for link in hyperlinks:
                link_host = urlsplit(link).hostname or ""
                if _registrable_domain(link_host) not in allowed_domains:
                    continue
                if link in enqueued:
                    continue
                enqueued.add(link)
                frontier.append((link, depth + 1))

    if not any_seed_fetched and seed_failures and len(seed_failures) == len(set(seeds)):
        raise CrawlFailed(seed_failures)

    return result


@dataclass
class IdentifiedCamera:
    descriptor: CameraDescriptor
    verdict: Optional[LivenessVerdict]
    sample_times: list


def identify_candidates(candidates: Sequence[CandidateLink],
                        retriever: Callable[[str], bytes],
                        config: LivenessConfig = LivenessConfig(),
                        clock: Optional[Callable[[], datetime]] = None,
                        sleep: Callable[[float], None] = time.sleep) -> list:
    """Probe each candidate and classify it as a live camera or not.

    Still-image candidates are retrieved ``config.samples`` times, spaced by
    ``config.spacing_seconds``, and classified by liveness.  Video-stream
    candidates are marked live when a frame is obtainable.  Unreachable
    candidates are recorded as such, never fatal.
    """
    clock = clock or (lambda: datetime.now(timezone.utc))
    results = []

    for candidate in candidates:
        kind = KIND_VIDEO if candidate.kind == KIND_VIDEO_STREAM else KIND_STILL

        if kind == KIND_VIDEO:
            try:
                frame = retriever(candidate.url)
                status = STATUS_LIVE if frame else STATUS_UNREACHABLE
            except Exception as exc:
                logger.warning("probe failed for %s: %s", candidate.url, exc)
                status = STATUS_UNREACHABLE
            results.append(IdentifiedCamera(
                descriptor=CameraDescriptor.for_url(candidate.url, kind, status),
                verdict=None, sample_times=[]))
            continue

        retrievals, times = [], []
        for attempt in range(config.samples):
            if attempt > 0 and config.spacing_seconds > 0:
                sleep(config.spacing_seconds)
            try:
                raw = retriever(candidate.url)
            except Exception as exc:
                logger.warning("snapshot %d failed for %s: %s", attempt, candidate.url, exc)
                continue
            at = clock()
            retrievals.append(retrieval_from_bytes(raw, at))
            times.append(at)

        if len(retrievals) < 2:
            results.append(IdentifiedCamera(
                descriptor=CameraDescriptor.for_url(candidate.url, kind, STATUS_UNREACHABLE),
                verdict=None, sample_times=times))
            continue

        try:
            verdict = classify_liveness(retrievals, config)
            status = STATUS_LIVE if verdict.status == STATUS_LIVE else STATUS_STATIC
        except InsufficientSamples:
            # reachable but never decodable: some static non-image asset
            verdict = None
            status = STATUS_STATIC
        results.append(IdentifiedCamera(
            descriptor=CameraDescriptor.for_url(candidate.url, kind, status),
            verdict=verdict, sample_times=times))

    return results


def write_candidates(path, candidates) -> None:
    write_jsonl(path, (c.to_record() for c in candidates))


def read_candidates(path) -> list:
    return [CandidateLink.from_record(rec) for _, rec in read_jsonl(path)]


def write_verdicts(path, identified) -> None:
    records = []
    for item in identified:
        rec = {
            "camera_id": item.descriptor.camera_id,
            "status": item.descriptor.status,
            "samples": [format_rfc3339(t) for t in item.sample_times],
        }
        if item.verdict is not None:
            rec.update({
                "checksum_changed": item.verdict.checksum_changed,
                "percent_diff": item.verdict.percent_diff,
                "luminance_diff": item.verdict.luminance_diff,
                "checksum_algorithm": item.verdict.checksum_algorithm,
            })
        records.append(rec)
    write_jsonl(path, records)

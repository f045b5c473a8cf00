"""Liveness and frozen-stream checks for candidate camera links.

A data link is "live" when its content changes over time.  Three comparisons
are run on pairs of retrievals: a byte checksum, the fraction of changed
pixels, and the change in mean luminance.  A stream is "frozen" when equally
spaced archived images are pixelwise identical.
"""

import hashlib
from dataclasses import dataclass, field
from datetime import datetime
from typing import Optional, Sequence

import numpy as np

from .errors import DecodeError, DimensionMismatch, InsufficientSamples, InvalidInput
from .images import PixelImage

CHECKSUM_ALGORITHM = "sha256"

STATUS_LIVE = "live"
STATUS_STATIC = "static"


@dataclass(frozen=True)
class LivenessConfig:
    """Thresholds and retrieval policy for liveness classification.

    A link is Live only when some consecutive pair both changed its checksum
    and moved at least one pixel metric past its minimum.  Checksum alone
    misfires on re-encoded static assets; pixel metrics alone misfire on
    cached identical bytes.
    """

    min_percent: float = 0.001
    min_luminance: float = 1.0
    channel_tolerance: int = 0
    samples: int = 3
    spacing_seconds: float = 10.0


@dataclass(frozen=True)
class LivenessVerdict:
    status: str
    checksum_changed: bool
    percent_diff: float
    luminance_diff: float
    checksum_algorithm: str = CHECKSUM_ALGORITHM

    def __post_init__(self):
        if self.status == STATUS_LIVE and not self.checksum_changed:
            raise InvalidInput("a live verdict requires a checksum change")
        if not 0.0 <= self.percent_diff <= 1.0:
            raise InvalidInput(f"percent_diff out of range: {self.percent_diff}")
        if self.luminance_diff < 0.0:
            raise InvalidInput(f"negative luminance_diff: {self.luminance_diff}")


@dataclass
class Retrieval:
    """One timed snapshot of a data link.  ``image`` is None when undecodable."""

    raw: bytes
    image: Optional[PixelImage]
    retrieved_at: Optional[datetime] = None
    decode_error: Optional[str] = None


def retrieval_from_bytes(raw: bytes, retrieved_at: Optional[datetime] = None) -> Retrieval:
    try:
        image = PixelImage.from_bytes(raw)
        return Retrieval(raw=raw, image=image, retrieved_at=retrieved_at)
    except DecodeError as exc:
        return Retrieval(raw=raw, image=None, retrieved_at=retrieved_at, decode_error=str(exc))


def checksum_changed(a: bytes, b: bytes) -> bool:
    """True iff the digests of the two byte sequences differ."""
    if not a or not b:
        raise InvalidInput("checksum comparison requires non-empty byte sequences")
    da = hashlib.new(CHECKSUM_ALGORITHM, a).digest()
    db = hashlib.new(CHECKSUM_ALGORITHM, b).digest()
    return da != db


def _require_same_dimensions(a: PixelImage, b: PixelImage) -> None:
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionMismatch(
            f"image dimensions differ: {a.width}x{a.height} vs {b.width}x{b.height}"
        )


def percent_difference(a: PixelImage, b: PixelImage, channel_tolerance: int = 0) -> float:
    """Fraction of pixel positions where any channel differs by more than the tolerance."""
    if channel_tolerance < 0:
        raise InvalidInput("channel_tolerance must be non-negative")
    _require_same_dimensions(a, b)
    delta = np.abs(a.pixels.astype(np.int16) - b.pixels.astype(np.int16))
    changed = int((delta > channel_tolerance).any(axis=2).sum())
    return changed / (a.width * a.height)


def luminance_difference(a: PixelImage, b: PixelImage) -> float:
    """Absolute change in mean luminance between the two images."""
    _require_same_dimensions(a, b)
    return abs(a.mean_luminance() - b.mean_luminance())


def classify_liveness(samples: Sequence[Retrieval], config: LivenessConfig = LivenessConfig()) -> LivenessVerdict:
    """Classify a data link from ordered retrievals taken at different times.

    Live iff at least one consecutive pair changed its checksum AND moved a
    pixel metric (percent or luminance) past the configured minimum.  The
    verdict carries the maximal observed value of each metric.  Pairs with an
    undecodable side are skipped; when every pair is skipped there is nothing
    to compare and InsufficientSamples is raised.
    """
    if len(samples) < 2:
        raise InsufficientSamples(f"need at least 2 retrievals, got {len(samples)}")

    any_checksum_changed = False
    max_percent = 0.0
    max_luminance = 0.0
    live = False
    scored_pairs = 0

    for prev, curr in zip(samples, samples[1:]):
        if prev.image is None or curr.image is None:
            continue
        scored_pairs += 1
        pair_checksum = checksum_changed(prev.raw, curr.raw)
        pair_percent = percent_difference(prev.image, curr.image, config.channel_tolerance)
        pair_luminance = luminance_difference(prev.image, curr.image)
        any_checksum_changed = any_checksum_changed or pair_checksum
        max_percent = max(max_percent, pair_percent)
        max_luminance = max(max_luminance, pair_luminance)
        if pair_checksum and (pair_percent >= config.min_percent or pair_luminance >= config.min_luminance):
            live = True

    if scored_pairs == 0:
        raise InsufficientSamples("no decodable consecutive pair among the retrievals")

    return LivenessVerdict(
        status=STATUS_LIVE if live else STATUS_STATIC,
        checksum_changed=any_checksum_changed,
        percent_diff=max_percent,
        luminance_diff=max_luminance,
    )


def is_frozen(archive_samples: Sequence[PixelImage]) -> bool:
    """True iff all four equally spaced archive images are pixelwise identical."""
    if len(archive_samples) != 4:
        raise InvalidInput(f"frozen check takes exactly 4 images, got {len(archive_samples)}")
    first = archive_samples[0]
    for other in archive_samples[1:]:
        _require_same_dimensions(first, other)
        if not np.array_equal(first.pixels, other.pixels):
            return False
    return True


def select_equally_spaced(archive: Sequence) -> list:
    """Pick 4 equally spaced entries (first and last always included)."""
    n = len(archive)
    if n < 4:
        raise InsufficientSamples(f"need at least 4 archived images, got {n}")
    # i*(n-1)/3 has fractional part 0, 1/3 or 2/3, so rounding is unambiguous
    return [archive[round(i * (n - 1) / 3)] for i in range(4)]

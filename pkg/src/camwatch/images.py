"""Decoded raster images as fixed-shape RGB arrays."""

import io
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, InvalidInput

# Rec. 601 luma weights; monotone in brightness and standard for 8-bit video.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class PixelImage:
    """An RGB raster. ``pixels`` has shape (height, width, 3), dtype uint8."""

    width: int
    height: int
    pixels: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InvalidInput(f"image dimensions must be positive, got {self.width}x{self.height}")
        if self.pixels.shape != (self.height, self.width, 3):
            raise InvalidInput(
                f"pixel grid shape {self.pixels.shape} does not match {self.height}x{self.width}x3"
            )
        if self.pixels.dtype != np.uint8:
            raise InvalidInput(f"pixel channels must be uint8, got {self.pixels.dtype}")

    @classmethod
    def from_array(cls, pixels: np.ndarray) -> "PixelImage":
        arr = np.asarray(pixels, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise InvalidInput(f"expected (h, w, 3) array, got shape {arr.shape}")
        return cls(width=arr.shape[1], height=arr.shape[0], pixels=arr)

    @classmethod
    def from_bytes(cls, raw: bytes) -> "PixelImage":
        """Decode an encoded image (JPEG/PNG/...) into an RGB raster."""
        if not raw:
            raise InvalidInput("empty byte sequence")
        try:
            with Image.open(io.BytesIO(raw)) as im:
                rgb = im.convert("RGB")
                arr = np.asarray(rgb, dtype=np.uint8)
        except (UnidentifiedImageError, OSError, ValueError) as exc:
            raise DecodeError(f"cannot decode image: {exc}") from exc
        return cls.from_array(arr)

    def mean_luminance(self) -> float:
        """Mean per-pixel luma (Rec. 601 weights) over the whole image."""
        flat = self.pixels.astype(np.float64)
        return float(
            (flat[:, :, 0] * LUMA_WEIGHTS[0]
             + flat[:, :, 1] * LUMA_WEIGHTS[1]
             + flat[:, :, 2] * LUMA_WEIGHTS[2]).mean()
        )


def encode_png(image: PixelImage) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(image.pixels).save(buf, format="PNG")
    return buf.getvalue()


def encode_jpeg(image: PixelImage, quality: int = 85) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(image.pixels).save(buf, format="JPEG", quality=quality)
    return buf.getvalue()

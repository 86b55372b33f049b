"""Minimal image and mask handling: PNG load/save, bounding boxes, resampling.

PNG is the single raster format. Masks are grayscale PNGs where luminance
>= threshold (default 128) marks foreground.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image


class RasterError(ValueError):
    pass


@dataclass(eq=False)
class RgbImage:
    pixels: np.ndarray  # (H, W, 3) uint8, row-major, row 0 top

    def __post_init__(self) -> None:
        self.pixels = np.asarray(self.pixels, dtype=np.uint8)
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3:
            raise RasterError("pixels must have shape (H, W, 3)")
        if self.pixels.shape[0] < 1 or self.pixels.shape[1] < 1:
            raise RasterError("image must be at least 1x1")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(eq=False)
class BinaryMask:
    bits: np.ndarray  # (H, W) bool

    def __post_init__(self) -> None:
        self.bits = np.asarray(self.bits, dtype=bool)
        if self.bits.ndim != 2:
            raise RasterError("bits must have shape (H, W)")

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    def count(self) -> int:
        return int(self.bits.sum())


def load_image(path) -> RgbImage:
    """Load an 8-bit RGB or grayscale PNG; grayscale value v becomes (v, v, v)."""
    try:
        img = Image.open(Path(path))
        img.load()
    except Exception as exc:
        raise RasterError(f"cannot read image {path}: {exc}") from exc
    if img.mode in ("I", "I;16", "I;16B", "I;16L"):
        raise RasterError(f"unsupported bit depth in {path} (16-bit PNG)")
    if img.mode == "L":
        arr = np.asarray(img, dtype=np.uint8)
        return RgbImage(np.repeat(arr[:, :, None], 3, axis=2))
    if img.mode == "RGB":
        return RgbImage(np.asarray(img, dtype=np.uint8))
    raise RasterError(f"unsupported image mode {img.mode!r} in {path} (need 8-bit RGB or grayscale)")


def save_image(img: RgbImage, path) -> None:
    Image.fromarray(img.pixels, mode="RGB").save(Path(path), format="PNG")


def load_mask(path, threshold: int = 128) -> BinaryMask:
    """Load a mask PNG: bit set where luminance >= threshold.

    RGB inputs are reduced with BT.601 luma; grayscale uses the raw value.
    """
    img = load_image(path)
    px = img.pixels.astype(np.float64)
    luma = 0.299 * px[:, :, 0] + 0.587 * px[:, :, 1] + 0.114 * px[:, :, 2]
    return BinaryMask(luma >= threshold)


def save_mask(mask: BinaryMask, path) -> None:
    arr = np.where(mask.bits, 255, 0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(Path(path), format="PNG")


def mask_bbox(mask: BinaryMask):
    """Tight inclusive bbox of set bits as (min_col, min_row, max_col, max_row), or None."""
    rows = np.flatnonzero(mask.bits.any(axis=1))
    if rows.size == 0:
        return None
    cols = np.flatnonzero(mask.bits.any(axis=0))
    return int(cols[0]), int(rows[0]), int(cols[-1]), int(rows[-1])


def _source_coords(out_n: int, src_n: int) -> np.ndarray:
    # pixel-center alignment: src = (i + 0.5) * scale - 0.5, clamped into range
    scale = src_n / out_n
    coords = (np.arange(out_n, dtype=np.float64) + 0.5) * scale - 0.5
    return np.clip(coords, 0.0, src_n - 1.0)


def resize_bilinear(img: RgbImage, out_w: int, out_h: int) -> RgbImage:
    """Resize with bilinear interpolation and half-pixel-center alignment."""
    if out_w < 1 or out_h < 1:
        raise RasterError("output size must be >= 1")
    src = img.pixels.astype(np.float64)
    h, w = src.shape[:2]
    if (out_w, out_h) == (w, h):
        return RgbImage(img.pixels.copy())

    sx = _source_coords(out_w, w)
    sy = _source_coords(out_h, h)
    x0 = np.floor(sx).astype(np.intp)
    y0 = np.floor(sy).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (sx - x0)[None, :, None]
    fy = (sy - y0)[:, None, None]

    top = src[y0][:, x0] * (1 - fx) + src[y0][:, x1] * fx
    bot = src[y1][:, x0] * (1 - fx) + src[y1][:, x1] * fx
    out = top * (1 - fy) + bot * fy
    return RgbImage(np.rint(out).astype(np.uint8))


def resize_mask_nearest(mask: BinaryMask, out_w: int, out_h: int) -> BinaryMask:
    """Nearest-neighbor mask resize (stencil use; keeps bits crisp)."""
    if out_w < 1 or out_h < 1:
        raise RasterError("output size must be >= 1")
    h, w = mask.bits.shape
    xs = np.minimum(np.floor((np.arange(out_w) + 0.5) * (w / out_w)).astype(np.intp), w - 1)
    ys = np.minimum(np.floor((np.arange(out_h) + 0.5) * (h / out_h)).astype(np.intp), h - 1)
    return BinaryMask(mask.bits[ys][:, xs])

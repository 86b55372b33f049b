"""Standardize a segmented ship into the fixed-size network input image.

The ship is cut out with its mask, rescaled so its bounding box covers a
target fraction of the output area (aspect preserved, clamped to fit), and
composited centered on a uniform gray background.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .raster import BinaryMask, RgbImage, mask_bbox, resize_bilinear, resize_mask_nearest


@dataclass
class PreprocessConfig:
    target_area_fraction: float = 0.65
    out_size: int = 128
    background_gray: int = 128
    # "bbox": bounding-box area reaches the target fraction (closed-form, stable
    # for thin hulls). "mask": the mask pixel area is used instead.
    scale_by: str = "bbox"

    def __post_init__(self) -> None:
        if not 0.0 < self.target_area_fraction <= 1.0:
            raise ValueError("target_area_fraction must be in (0, 1]")
        if self.out_size < 8:
            raise ValueError("out_size must be >= 8")
        if not 0 <= self.background_gray <= 255:
            raise ValueError("background_gray must be a byte value")
        if self.scale_by not in ("bbox", "mask"):
            raise ValueError("scale_by must be 'bbox' or 'mask'")


def standardize_ship_image(img: RgbImage, mask: BinaryMask,
                           cfg: PreprocessConfig | None = None) -> RgbImage:
    """Produce the out_size x out_size standardized input image.

    Scale s = min(sqrt(fraction * out^2 / area), out/bw, out/bh) where area is
    the mask bbox area (or mask pixel count with scale_by="mask"). Ship pixels
    are resampled bilinearly; the mask is resampled nearest-neighbor and used
    as the compositing stencil so the gray background never bleeds into the
    ship. The scaled bbox is centered in the output frame.
    """
    cfg = cfg or PreprocessConfig()
    if (img.width, img.height) != (mask.width, mask.height):
        raise ValueError(
            f"image ({img.width}x{img.height}) and mask "
            f"({mask.width}x{mask.height}) dimensions differ"
        )
    box = mask_bbox(mask)
    if box is None:
        raise ValueError("no ship in mask")
    c0, r0, c1, r1 = box
    bw = c1 - c0 + 1
    bh = r1 - r0 + 1
    out = cfg.out_size

    if cfg.scale_by == "bbox":
        area = bw * bh
    else:
        area = mask.count()
    s = min(math.sqrt(cfg.target_area_fraction * out * out / area), out / bw, out / bh)

    tw = max(1, int(s * bw + 0.5))
    th = max(1, int(s * bh + 0.5))
    ox = int(math.floor((out - s * bw) / 2.0))
    oy = int(math.floor((out - s * bh) / 2.0))

    crop_img = RgbImage(img.pixels[r0:r1 + 1, c0:c1 + 1])
    crop_mask = BinaryMask(mask.bits[r0:r1 + 1, c0:c1 + 1])
    ship = resize_bilinear(crop_img, tw, th)
    stencil = resize_mask_nearest(crop_mask, tw, th)

    g = cfg.background_gray
    canvas = np.full((out, out, 3), g, dtype=np.uint8)
    region = canvas[oy:oy + th, ox:ox + tw]
    region[stencil.bits] = ship.pixels[stencil.bits]
    return RgbImage(canvas)

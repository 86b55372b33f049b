"""Image-quality metrics: MSE, PSNR, SSIM.

SSIM follows the standard Wang et al. setup: BT.601 luma, 11x11 Gaussian
window with sigma 1.5, k1 = 0.01, k2 = 0.03, peak 255, averaged over windows
fully inside the image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .raster import RgbImage


@dataclass
class SsimConfig:
    window: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    peak: float = 255.0


@dataclass
class MetricsReport:
    mse: float
    psnr_db: float  # math.inf when images are identical
    ssim: float

    def to_dict(self) -> dict:
        return {
            "mse": self.mse,
            "psnr_db": "inf" if math.isinf(self.psnr_db) else self.psnr_db,
            "ssim": self.ssim,
        }


def _check_shapes(a: RgbImage, b: RgbImage) -> None:
    if a.pixels.shape != b.pixels.shape:
        raise ValueError(
            f"image dimensions differ: {a.width}x{a.height} vs {b.width}x{b.height}"
        )


def mse(a: RgbImage, b: RgbImage) -> float:
    """Mean squared byte difference over all pixels and channels."""
    _check_shapes(a, b)
    da = a.pixels.astype(np.float64)
    db = b.pixels.astype(np.float64)
    return float(np.mean((da - db) ** 2))


def psnr(a: RgbImage, b: RgbImage, peak: float = 255.0) -> float:
    """10*log10(peak^2 / mse) in dB; +inf for identical images."""
    err = mse(a, b)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / err)


def luma(img: RgbImage) -> np.ndarray:
    """BT.601 luma as float64, no rounding."""
    px = img.pixels.astype(np.float64)
    return 0.299 * px[:, :, 0] + 0.587 * px[:, :, 1] + 0.114 * px[:, :, 2]


def gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    """Normalized 2-D Gaussian weights of the given odd size."""
    half = (size - 1) / 2.0
    x = np.arange(size, dtype=np.float64) - half
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    k = np.outer(g, g)
    return k / k.sum()


def _window_sums(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Weighted window sums at every fully-interior position ("valid" mode)."""
    k = kernel.shape[0]
    windows = np.lib.stride_tricks.sliding_window_view(plane, (k, k))
    return np.einsum("ijkl,kl->ij", windows, kernel)


def ssim(a: RgbImage, b: RgbImage, cfg: SsimConfig | None = None) -> float:
    """Mean structural similarity over luma, windows fully inside the image."""
    cfg = cfg or SsimConfig()
    _check_shapes(a, b)
    if a.width < cfg.window or a.height < cfg.window:
        raise ValueError(
            f"image {a.width}x{a.height} smaller than SSIM window {cfg.window}"
        )
    x = luma(a)
    y = luma(b)
    kernel = gaussian_kernel(cfg.window, cfg.sigma)
    c1 = (cfg.k1 * cfg.peak) ** 2
    c2 = (cfg.k2 * cfg.peak) ** 2

    mu_x = _window_sums(x, kernel)
    mu_y = _window_sums(y, kernel)
    sigma_x = _window_sums(x * x, kernel) - mu_x * mu_x
    sigma_y = _window_sums(y * y, kernel) - mu_y * mu_y
    sigma_xy = _window_sums(x * y, kernel) - mu_x * mu_y

    num = (2.0 * mu_x * mu_y + c1) * (2.0 * sigma_xy + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (sigma_x + sigma_y + c2)
    return float(np.mean(num / den))


def compute_report(a: RgbImage, b: RgbImage, ssim_cfg: SsimConfig | None = None) -> MetricsReport:
    return MetricsReport(mse=mse(a, b), psnr_db=psnr(a, b), ssim=ssim(a, b, ssim_cfg))

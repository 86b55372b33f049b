"""Export chain for reconstructed ship clouds.

Order is fixed: opacity filter -> recenter -> canonical rotation -> scale to
real-world length. Filtering runs first so spurious low-opacity points never
skew the centroid or the length estimate. Rotation composition is extrinsic
X -> Y -> Z about the world axes (R = Rz @ Ry @ Rx, right-handed,
counterclockwise positive); the map viewer must use the same convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .splat_io import GaussianSplatCloud, StandardPointCloud, sh_dc_to_rgb

DEFAULT_ROTATION_ANGLES = (math.pi / 2.0, math.pi, math.pi)
DEFAULT_OPACITY_THRESHOLD = -3.0

# Below this z-extent the cloud has no usable length axis.
EXTENT_EPS = 1e-9


@dataclass
class PostprocessConfig:
    target_length_m: float
    opacity_threshold: float = DEFAULT_OPACITY_THRESHOLD
    rotation_angles: tuple[float, float, float] = DEFAULT_ROTATION_ANGLES

    def __post_init__(self) -> None:
        if not (self.target_length_m > 0.0 and math.isfinite(self.target_length_m)):
            raise ValueError("target_length_m must be > 0")
        if not all(math.isfinite(a) for a in self.rotation_angles):
            raise ValueError("rotation angles must be finite")


@dataclass
class ExportResult:
    cloud: StandardPointCloud
    points_total: int
    points_retained: int
    centroid: np.ndarray = field(repr=False)
    z_extent_before_scale: float = 0.0
    scale_factor: float = 1.0


def filter_by_opacity(cloud: GaussianSplatCloud, threshold: float) -> GaussianSplatCloud:
    """Keep points with opacity logit strictly above threshold (may return empty)."""
    return cloud.take(cloud.opacity_logits > threshold)


def recenter(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Subtract the centroid; returns (centered points, centroid)."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if len(pts) == 0:
        raise ValueError("cannot recenter an empty point set")
    centroid = pts.mean(axis=0)
    return pts - centroid, centroid


def rotation_matrix(angles: tuple[float, float, float]) -> np.ndarray:
    """R = Rz(az) @ Ry(ay) @ Rx(ax): extrinsic world-axis rotations X, then Y, then Z."""
    ax, ay, az = angles
    cx, sx = math.cos(ax), math.sin(ax)
    cy, sy = math.cos(ay), math.sin(ay)
    cz, sz = math.cos(az), math.sin(az)
    rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]], dtype=np.float64)
    ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]], dtype=np.float64)
    rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]], dtype=np.float64)
    return rz @ ry @ rx


def canonical_rotate(points: np.ndarray, angles: tuple[float, float, float]) -> np.ndarray:
    """Apply the fixed rotation sequence to column position vectors."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    return pts @ rotation_matrix(angles).T


def scale_to_length(points: np.ndarray, target_length_m: float) -> tuple[np.ndarray, float]:
    """Uniformly scale so the z-extent (max z - min z) equals the target length.

    Returns (scaled points, scale factor). Raises on degenerate z-extent.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if len(pts) == 0:
        raise ValueError("cloud has no length axis (empty point set)")
    extent = float(pts[:, 2].max() - pts[:, 2].min())
    if extent <= EXTENT_EPS:
        raise ValueError("cloud has no length axis (degenerate z-extent)")
    s = target_length_m / extent
    return pts * s, s


def export_chain_detailed(cloud: GaussianSplatCloud, cfg: PostprocessConfig) -> ExportResult:
    """Full chain with per-stage statistics (used by the CLI run manifest)."""
    total = len(cloud)
    kept = filter_by_opacity(cloud, cfg.opacity_threshold)
    if len(kept) == 0:
        raise ValueError(
            f"no points remain above opacity threshold {cfg.opacity_threshold}"
        )
    pts, centroid = recenter(kept.positions)
    pts = canonical_rotate(pts, cfg.rotation_angles)
    extent_before = float(pts[:, 2].max() - pts[:, 2].min())
    pts, scale = scale_to_length(pts, cfg.target_length_m)
    out = StandardPointCloud(positions=pts, colors=sh_dc_to_rgb(kept.f_dc))
    return ExportResult(
        cloud=out,
        points_total=total,
        points_retained=len(kept),
        centroid=centroid,
        z_extent_before_scale=extent_before,
        scale_factor=scale,
    )


def export_chain(cloud: GaussianSplatCloud, cfg: PostprocessConfig) -> StandardPointCloud:
    """filter_by_opacity -> recenter -> canonical_rotate -> scale_to_length -> RGB export."""
    return export_chain_detailed(cloud, cfg).cloud

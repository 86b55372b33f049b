"""Deterministic software point rasterizer.

Square splats with a z-buffer; no blending, no anti-aliasing. Exists so the
orientation conventions, camera math, and image metrics can be exercised
end-to-end without a graphics stack. Output is identical across runs: points
are processed in index order and depth ties keep the earlier point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera_rig import CameraPose, projection_matrix
from .raster import RgbImage
from .splat_io import StandardPointCloud


@dataclass
class RenderConfig:
    point_radius_px: int = 1
    background: tuple[int, int, int] = (128, 128, 128)

    def __post_init__(self) -> None:
        if self.point_radius_px < 0:
            raise ValueError("point_radius_px must be >= 0")


def render_points(cloud: StandardPointCloud, cam: CameraPose,
                  cfg: RenderConfig | None = None) -> tuple[RgbImage, np.ndarray]:
    """Rasterize a point cloud; returns (image, depth buffer).

    Points are transformed world -> camera -> NDC -> pixel. Camera-space z
    must lie in [-z_far, -z_near) or the point is culled. NDC (-1, 1)^2 maps
    to the pixel grid with centers at (x + 0.5, y + 0.5), row 0 at the top.
    The depth buffer holds -z_cam (+inf where nothing was drawn).
    """
    cfg = cfg or RenderConfig()
    intr = cam.intrinsics
    w, h = intr.width, intr.height
    image = np.empty((h, w, 3), dtype=np.uint8)
    image[:, :] = np.asarray(cfg.background, dtype=np.uint8)
    depth = np.full((h, w), np.inf)
    if len(cloud) == 0:
        return RgbImage(image), depth

    pts_h = np.column_stack([cloud.positions, np.ones(len(cloud))])
    cam_pts = pts_h @ cam.world_to_camera.T
    z = cam_pts[:, 2]
    visible = (z < -intr.z_near) & (z >= -intr.z_far)

    proj = projection_matrix(intr)
    clip = cam_pts @ proj.T
    ndc = clip[:, :3] / clip[:, 3:4]
    px = (ndc[:, 0] + 1.0) * 0.5 * w
    py = (1.0 - ndc[:, 1]) * 0.5 * h

    r = cfg.point_radius_px
    for i in np.flatnonzero(visible):
        ix = int(np.floor(px[i]))
        iy = int(np.floor(py[i]))
        if ix < 0 or ix >= w or iy < 0 or iy >= h:
            continue
        d = -z[i]
        x0, x1 = max(ix - r, 0), min(ix + r, w - 1)
        y0, y1 = max(iy - r, 0), min(iy + r, h - 1)
        tile = depth[y0:y1 + 1, x0:x1 + 1]
        win = d < tile  # strict: equal depth keeps the lower-index point
        tile[win] = d
        image[y0:y1 + 1, x0:x1 + 1][win] = cloud.colors[i]
    return RgbImage(image), depth

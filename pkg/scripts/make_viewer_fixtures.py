#!/usr/bin/env python3
"""Generate the frontend contract fixtures.

Builds a deterministic asymmetric ship cloud, exports it through the real
postprocess chain, and renders the reference view the web viewer must
reproduce (silhouette IoU check). Outputs go to frontend/test/fixtures/ and a
copy of the viewable assets to frontend/public/data/.
"""

from __future__ import annotations

import base64
import json
import math
import shutil
from pathlib import Path

import numpy as np

from ship3d.camera_rig import CameraIntrinsics, CameraPose, look_at
from ship3d.georef import AisRecord, GeoPoint, feature_collection, make_placement
from ship3d.postprocess import (
    DEFAULT_ROTATION_ANGLES,
    PostprocessConfig,
    canonical_rotate,
    export_chain,
)
from ship3d.raster import save_image
from ship3d.renderer import RenderConfig, render_points
from ship3d.splat_io import (
    GaussianSplatCloud,
    StandardPointCloud,
    rgb_to_sh_dc,
    write_gaussian_ply,
    write_standard_ply,
)

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "frontend" / "test" / "fixtures"
PUBLIC = ROOT / "frontend" / "public" / "data"

SHIP_LENGTH_M = 50.0
ANCHOR = GeoPoint(lat=53.5384, lon=8.5701)


def build_ship_cloud(seed: int = 4242) -> GaussianSplatCloud:
    """Asymmetric hull + off-center superstructure, length along -y.

    The export rotation (pi/2, pi, pi) maps (x, y, z) -> (x, z, -y), so a
    ship spanning y in the network frame ends up spanning z after export.
    Two exact centerline tip points at y = +-0.5 become the z extremes.
    """
    rng = np.random.default_rng(seed)
    n_hull = 2600
    y = rng.uniform(-0.5, 0.5, n_hull)
    taper = 1.0 - np.clip((np.abs(y) - 0.2) / 0.3, 0.0, 1.0) * 0.85
    x = rng.uniform(-0.08, 0.08, n_hull) * taper
    z = rng.uniform(-0.05, 0.03, n_hull) * taper
    hull = np.column_stack([x, y, z])

    n_top = 700
    ty = rng.uniform(0.1, 0.4, n_top)  # superstructure toward the stern only
    tx = rng.uniform(-0.05, 0.05, n_top)
    tz = rng.uniform(0.03, 0.16, n_top)
    top = np.column_stack([tx, ty, tz])

    tips = np.array([[0.0, -0.5, 0.0], [0.0, 0.5, 0.0]])
    noise = rng.uniform(-0.6, 0.6, (300, 3))

    positions = np.vstack([hull, top, tips, noise]).astype(np.float32)
    n = len(positions)
    logits = np.full(n, 2.0, dtype=np.float32)
    logits[-300:] = -5.0  # noise points sit below the opacity threshold

    colors = np.empty((n, 3), dtype=np.float64)
    colors[:n_hull] = (96, 110, 130)
    colors[n_hull:n_hull + n_top] = (235, 235, 228)
    colors[n_hull + n_top:n_hull + n_top + 2] = (200, 40, 40)
    colors[-300:] = (0, 255, 0)
    jitter = rng.uniform(-12, 12, (n, 3))
    f_dc = rgb_to_sh_dc(np.clip(colors + jitter, 0, 255))

    return GaussianSplatCloud(
        positions=positions,
        opacity_logits=logits,
        scales=rng.uniform(-6.0, -4.0, (n, 3)).astype(np.float32),
        rotations=np.tile(np.array([1, 0, 0, 0], np.float32), (n, 1)),
        f_dc=f_dc,
    )


def reference_camera() -> CameraPose:
    intr = CameraIntrinsics(fov_deg=45.0, z_near=1.0, z_far=500.0, width=256, height=256)
    eye = (55.0, 38.0, -52.0)
    return CameraPose(look_at(eye, (0.0, 0.0, 0.0), (0.0, 1.0, 0.0)), intr)


def silhouette_doc(image, background=(40, 40, 40)) -> dict:
    bg = np.asarray(background, dtype=np.uint8)
    bits = np.any(image.pixels != bg, axis=2)
    rows = ["".join("1" if b else "0" for b in row) for row in bits]
    return {"width": image.width, "height": image.height, "rows": rows}


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    PUBLIC.mkdir(parents=True, exist_ok=True)

    gaussians = build_ship_cloud()
    (FIXTURES / "gaussians.ply").write_bytes(write_gaussian_ply(gaussians))

    cfg = PostprocessConfig(target_length_m=SHIP_LENGTH_M)
    ship = export_chain(gaussians, cfg)
    ship_bytes = write_standard_ply(ship)
    (FIXTURES / "ship.ply").write_bytes(ship_bytes)

    record = make_placement(
        ANCHOR, AisRecord(length_m=SHIP_LENGTH_M), "ship.ply",
        DEFAULT_ROTATION_ANGLES, (79, 89),
    )
    placement = feature_collection([record])
    (FIXTURES / "placement.geojson").write_text(
        json.dumps(placement, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )

    # reference view: the viewer applies the placement's rotation_angles to the
    # exported cloud, so the oracle renders exactly that rotated geometry
    cam = reference_camera()
    viewer_space = StandardPointCloud(
        canonical_rotate(ship.positions, DEFAULT_ROTATION_ANGLES), ship.colors
    )
    image, _ = render_points(viewer_space, cam, RenderConfig(point_radius_px=1,
                                                             background=(40, 40, 40)))
    save_image(image, FIXTURES / "reference_view.png")
    (FIXTURES / "reference_silhouette.json").write_text(
        json.dumps(silhouette_doc(image)) + "\n", encoding="utf-8"
    )
    (FIXTURES / "camera.json").write_text(
        json.dumps({
            "intrinsics": {
                "fov_deg": cam.intrinsics.fov_deg,
                "z_near": cam.intrinsics.z_near,
                "z_far": cam.intrinsics.z_far,
                "width": cam.intrinsics.width,
                "height": cam.intrinsics.height,
            },
            "world_to_camera": cam.world_to_camera.tolist(),
        }, indent=2) + "\n", encoding="utf-8"
    )

    for name in ("ship.ply", "placement.geojson"):
        shutil.copyfile(FIXTURES / name, PUBLIC / name)
    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()

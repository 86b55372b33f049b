"""Command-line entry point.

Subcommands mirror the pipeline stages (preprocess, postprocess, georef,
cameras, render, metrics) plus `run`, which executes the whole chain for one
ship and writes a manifest that pins every config value and input hash.
Set SHIP3D_LOG_LEVEL (DEBUG/INFO/WARNING) to control verbosity.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
from pathlib import Path

from . import camera_rig, georef, metrics, postprocess, preprocess, renderer, splat_io
from .raster import load_image, load_mask, save_image

log = logging.getLogger("ship3d")


class StageError(RuntimeError):
    """Pipeline failure tagged with the stage it happened in."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _parse_angles(text: str) -> tuple[float, float, float]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 3:
        raise ValueError(f"expected three comma-separated angles, got {text!r}")
    return tuple(float(p) for p in parts)


def _parse_rgb(text: str) -> tuple[int, int, int]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 3:
        raise ValueError(f"expected three comma-separated bytes, got {text!r}")
    return tuple(int(p) for p in parts)


# --- subcommand bodies ---------------------------------------------------


def cmd_preprocess(args) -> int:
    cfg = preprocess.PreprocessConfig(
        target_area_fraction=args.fraction,
        out_size=args.size,
        background_gray=args.gray,
        scale_by=args.scale_by,
    )
    img = load_image(args.image)
    mask = load_mask(args.mask)
    out = preprocess.standardize_ship_image(img, mask, cfg)
    save_image(out, args.out)
    log.info("preprocess: wrote %s (%dx%d)", args.out, out.width, out.height)
    return 0


def cmd_postprocess(args) -> int:
    cfg = postprocess.PostprocessConfig(
        target_length_m=args.length_m,
        opacity_threshold=args.opacity_threshold,
        rotation_angles=_parse_angles(args.rot),
    )
    cloud = splat_io.read_gaussian_ply(Path(args.input).read_bytes())
    result = postprocess.export_chain_detailed(cloud, cfg)
    Path(args.out).write_bytes(splat_io.write_standard_ply(result.cloud))
    log.info(
        "postprocess: kept %d/%d points, scale %.6g, wrote %s",
        result.points_retained, result.points_total, result.scale_factor, args.out,
    )
    return 0


def _resolve_placement(mask_path, calib_path, ais, strategy):
    """Key pixel + position, via homography when calibrated, else AIS fallback."""
    mask = load_mask(mask_path)
    key_pixel = georef.select_key_pixel(mask, strategy)
    residual = None
    if calib_path is not None:
        homography, residual = georef.load_calibration(calib_path)
        geo = georef.apply_homography(homography, key_pixel)
    elif ais.lat is not None and ais.lon is not None:
        geo = georef.GeoPoint(lat=ais.lat, lon=ais.lon)
    else:
        raise georef.GeorefError("no calibration and no AIS lat/lon fallback")
    return key_pixel, geo, residual


def cmd_georef(args) -> int:
    ais = georef.load_ais(args.ais)
    if ais.length_m is None:
        raise StageError("georef", "length_m required")
    key_pixel, geo, residual = _resolve_placement(
        args.mask, args.calib, ais, args.key_pixel_strategy
    )
    record = georef.make_placement(
        geo, ais, args.model, _parse_angles(args.rot), key_pixel
    )
    _write_json(Path(args.out), georef.feature_collection([record]))
    log.info(
        "georef: key pixel %s -> (%.6f, %.6f), residual %s",
        key_pixel, geo.lon, geo.lat, residual,
    )
    return 0


def cmd_cameras(args) -> int:
    intr = camera_rig.CameraIntrinsics(
        fov_deg=args.fov, z_near=args.near, z_far=args.far,
        width=args.width, height=args.height,
    )
    poses = camera_rig.sample_hemisphere_cameras(
        n=args.n, seed=args.seed, radius=args.radius, intr=intr
    )
    _write_json(Path(args.out), camera_rig.poses_to_json_dict(poses))
    log.info("cameras: wrote %d poses to %s", len(poses), args.out)
    return 0


def cmd_render(args) -> int:
    cam_path, _, index = args.camera.partition("#")
    idx = int(index) if index else 0
    doc = json.loads(Path(cam_path).read_text(encoding="utf-8"))
    poses = camera_rig.poses_from_json_dict(doc)
    if not 0 <= idx < len(poses):
        raise ValueError(f"camera index {idx} out of range (have {len(poses)})")
    cloud = splat_io.read_standard_ply(Path(args.ply).read_bytes())
    cfg = renderer.RenderConfig(
        point_radius_px=args.radius_px, background=_parse_rgb(args.background)
    )
    image, _ = renderer.render_points(cloud, poses[idx], cfg)
    save_image(image, args.out)
    log.info("render: %d points -> %s", len(cloud), args.out)
    return 0


def cmd_metrics(args) -> int:
    a = load_image(args.a)
    b = load_image(args.b)
    report = metrics.compute_report(a, b)
    if args.json:
        print(json.dumps(report.to_dict(), sort_keys=True))
    else:
        psnr_text = "inf" if math.isinf(report.psnr_db) else f"{report.psnr_db:.4f}"
        print(f"mse={report.mse:.6f} psnr_db={psnr_text} ssim={report.ssim:.6f}")
    return 0


def cmd_run(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    png_path = out_dir / "standardized.png"
    ply_path = out_dir / "ship.ply"
    geojson_path = out_dir / "placement.geojson"
    manifest_path = out_dir / "manifest.json"

    rotation_angles = _parse_angles(args.rot)

    try:
        img = load_image(args.image)
        mask = load_mask(args.mask)
        pre_cfg = preprocess.PreprocessConfig(
            target_area_fraction=args.fraction, out_size=args.size,
            background_gray=args.gray,
        )
        standardized = preprocess.standardize_ship_image(img, mask, pre_cfg)
        save_image(standardized, png_path)
    except StageError:
        raise
    except Exception as exc:
        raise StageError("preprocess", str(exc)) from exc
    log.info("run: standardized image -> %s", png_path)

    try:
        ais = georef.load_ais(args.ais)
        if ais.length_m is None:
            raise StageError("georef", "length_m required")
        post_cfg = postprocess.PostprocessConfig(
            target_length_m=ais.length_m,
            opacity_threshold=args.opacity_threshold,
            rotation_angles=rotation_angles,
        )
        cloud = splat_io.read_gaussian_ply(Path(args.gaussians).read_bytes())
        result = postprocess.export_chain_detailed(cloud, post_cfg)
        ply_path.write_bytes(splat_io.write_standard_ply(result.cloud))
    except StageError:
        raise
    except Exception as exc:
        raise StageError("postprocess", str(exc)) from exc
    log.info("run: %d/%d points exported -> %s",
             result.points_retained, result.points_total, ply_path)

    try:
        key_pixel, geo, residual = _resolve_placement(
            args.mask, args.calib, ais, args.key_pixel_strategy
        )
        record = georef.make_placement(
            geo, ais, ply_path.name, rotation_angles, key_pixel
        )
        _write_json(geojson_path, georef.feature_collection([record]))
    except StageError:
        raise
    except Exception as exc:
        raise StageError("georef", str(exc)) from exc
    log.info("run: placement (%.6f, %.6f) -> %s", geo.lon, geo.lat, geojson_path)

    inputs = {
        "image": args.image, "mask": args.mask, "gaussians": args.gaussians,
        "ais": args.ais,
    }
    if args.calib:
        inputs["calibration"] = args.calib
    manifest = {
        "inputs": {
            name: {"path": str(p), "sha256": _sha256(p)} for name, p in inputs.items()
        },
        "config": {
            "preprocess": {
                "target_area_fraction": pre_cfg.target_area_fraction,
                "out_size": pre_cfg.out_size,
                "background_gray": pre_cfg.background_gray,
                "scale_by": pre_cfg.scale_by,
            },
            "postprocess": {
                "target_length_m": post_cfg.target_length_m,
                "opacity_threshold": post_cfg.opacity_threshold,
                "rotation_angles": list(post_cfg.rotation_angles),
            },
            "key_pixel_strategy": args.key_pixel_strategy,
        },
        "outputs": {
            "standardized_png": png_path.name,
            "ship_ply": ply_path.name,
            "placement_geojson": geojson_path.name,
        },
        "stats": {
            "points_total": result.points_total,
            "points_retained": result.points_retained,
            "centroid": result.centroid.tolist(),
            "z_extent_before_scale": result.z_extent_before_scale,
            "scale_factor": result.scale_factor,
            "key_pixel": list(key_pixel),
            "homography_residual": residual,
            "position_lonlat": [geo.lon, geo.lat],
        },
    }
    _write_json(manifest_path, manifest)
    log.info("run: manifest -> %s", manifest_path)
    return 0


# --- parser --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ship3d",
        description="Ship splat-cloud postprocessing, georeferencing, and evaluation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="standardize a segmented ship image")
    p.add_argument("--image", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--fraction", type=float, default=0.65)
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--gray", type=int, default=128)
    p.add_argument("--scale-by", choices=("bbox", "mask"), default="bbox")
    p.set_defaults(func=cmd_preprocess, stage="preprocess")

    p = sub.add_parser("postprocess", help="filter, align, and scale a Gaussian cloud")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--length-m", dest="length_m", type=float, required=True)
    p.add_argument("--opacity-threshold", type=float,
                   default=postprocess.DEFAULT_OPACITY_THRESHOLD)
    p.add_argument("--rot", default=_angles_text(postprocess.DEFAULT_ROTATION_ANGLES))
    p.set_defaults(func=cmd_postprocess, stage="postprocess")

    p = sub.add_parser("georef", help="emit a georeferenced placement GeoJSON")
    p.add_argument("--mask", required=True)
    p.add_argument("--calib")
    p.add_argument("--ais", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--key-pixel-strategy", choices=georef.KEY_PIXEL_STRATEGIES,
                   default="bottom-center-bbox")
    p.add_argument("--rot", default=_angles_text(postprocess.DEFAULT_ROTATION_ANGLES))
    p.set_defaults(func=cmd_georef, stage="georef")

    p = sub.add_parser("cameras", help="sample hemisphere viewpoints")
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--radius", type=float, default=camera_rig.UNIT_CUBE_HEMISPHERE_RADIUS)
    p.add_argument("--fov", type=float, default=45.0)
    p.add_argument("--near", type=float, default=0.01)
    p.add_argument("--far", type=float, default=2.0)
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--height", type=int, default=128)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cameras, stage="cameras")

    p = sub.add_parser("render", help="rasterize a point cloud from a saved camera")
    p.add_argument("--ply", required=True)
    p.add_argument("--camera", required=True, help="cams.json or cams.json#index")
    p.add_argument("--out", required=True)
    p.add_argument("--radius-px", type=int, default=1)
    p.add_argument("--background", default="128,128,128")
    p.set_defaults(func=cmd_render, stage="render")

    p = sub.add_parser("metrics", help="compare two images (MSE/PSNR/SSIM)")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_metrics, stage="metrics")

    p = sub.add_parser("run", help="full pipeline for one ship")
    p.add_argument("--image", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--gaussians", required=True)
    p.add_argument("--ais", required=True)
    p.add_argument("--calib")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--fraction", type=float, default=0.65)
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--gray", type=int, default=128)
    p.add_argument("--opacity-threshold", type=float,
                   default=postprocess.DEFAULT_OPACITY_THRESHOLD)
    p.add_argument("--rot", default=_angles_text(postprocess.DEFAULT_ROTATION_ANGLES))
    p.add_argument("--key-pixel-strategy", choices=georef.KEY_PIXEL_STRATEGIES,
                   default="bottom-center-bbox")
    p.set_defaults(func=cmd_run, stage="run")

    return parser


def _angles_text(angles) -> str:
    return ",".join(repr(a) for a in angles)


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("SHIP3D_LOG_LEVEL", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"error: {args.stage}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

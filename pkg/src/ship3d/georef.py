"""Georeferencing: pixel-to-geographic homography, key-pixel selection, placements.

The homography maps mask pixels directly to (lon, lat) degrees, which is
adequate at port scale. Estimation is normalized DLT (Hartley): both point
sets are translated to their centroid and scaled to mean distance sqrt(2)
before solving the 2n x 9 system by SVD.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

EARTH_RADIUS_M = 6378137.0
MERCATOR_MAX_LAT_DEG = 85.051129

KEY_PIXEL_STRATEGIES = ("bottom-center-bbox", "bottom-of-centroid-column")


class GeorefError(ValueError):
    pass


@dataclass(frozen=True)
class GeoPoint:
    lat: float  # degrees, [-90, 90]
    lon: float  # degrees, [-180, 180]

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise GeorefError("latitude/longitude must be finite")
        if not -90.0 <= self.lat <= 90.0:
            raise GeorefError(f"latitude {self.lat} out of range [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise GeorefError(f"longitude {self.lon} out of range [-180, 180]")


@dataclass(eq=False)
class Homography:
    """3x3 projective map, normalized so h[2][2] == 1 whenever that entry is nonzero."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.shape != (3, 3):
            raise GeorefError("homography must be a 3x3 matrix")
        if not np.all(np.isfinite(m)):
            raise GeorefError("homography has non-finite entries")
        if m[2, 2] != 0.0:
            m = m / m[2, 2]
        if abs(np.linalg.det(m)) <= 1e-12:
            raise GeorefError("homography is singular")
        self.matrix = m

    def project(self, pixel) -> tuple[float, float]:
        """Apply to a pixel (u, v); returns raw (x, y) without geographic range checks."""
        u, v = float(pixel[0]), float(pixel[1])
        x, y, w = self.matrix @ (u, v, 1.0)
        if abs(w) <= 1e-12:
            raise GeorefError(f"pixel ({u}, {v}) maps to a point at infinity")
        return x / w, y / w


@dataclass
class AisRecord:
    length_m: float | None = None
    lat: float | None = None
    lon: float | None = None
    identity: str | None = None

    def __post_init__(self) -> None:
        if self.length_m is not None and not self.length_m > 0.0:
            raise GeorefError("AIS length_m must be > 0")


@dataclass
class PlacementRecord:
    position: GeoPoint
    length_m: float
    rotation_angles: tuple[float, float, float]
    model_uri: str
    source_pixel: tuple[int, int]

    def __post_init__(self) -> None:
        if not self.length_m > 0.0:
            raise GeorefError("placement length_m must be > 0")

    def to_geojson_feature(self) -> dict:
        return {
            "type": "Feature",
            "geometry": {
                "type": "Point",
                "coordinates": [self.position.lon, self.position.lat],
            },
            "properties": {
                "length_m": self.length_m,
                "rotation_angles": list(self.rotation_angles),
                "model_uri": self.model_uri,
                "source_pixel": list(self.source_pixel),
            },
        }


def _normalization_transform(pts: np.ndarray) -> np.ndarray:
    """Similarity that moves pts to centroid 0 with mean distance sqrt(2)."""
    centroid = pts.mean(axis=0)
    dist = np.linalg.norm(pts - centroid, axis=1).mean()
    if dist <= 0.0:
        raise GeorefError("degenerate correspondence set (coincident points)")
    s = math.sqrt(2.0) / dist
    return np.array([
        [s, 0.0, -s * centroid[0]],
        [0.0, s, -s * centroid[1]],
        [0.0, 0.0, 1.0],
    ])


def estimate_homography(correspondences) -> Homography:
    """Least-squares DLT from >= 4 ((u, v), (lon, lat)) correspondences."""
    pairs = list(correspondences)
    if len(pairs) < 4:
        raise GeorefError(f"need at least 4 correspondences, got {len(pairs)}")
    px = np.array([p[0] for p in pairs], dtype=np.float64)
    geo = np.array([p[1] for p in pairs], dtype=np.float64)
    if px.shape[1] != 2 or geo.shape[1] != 2:
        raise GeorefError("correspondences must pair 2-D pixel and geo points")

    t_px = _normalization_transform(px)
    t_geo = _normalization_transform(geo)
    ph = (t_px @ np.column_stack([px, np.ones(len(px))]).T).T
    gh = (t_geo @ np.column_stack([geo, np.ones(len(geo))]).T).T

    a = np.zeros((2 * len(pairs), 9))
    for i, ((x, y, _), (xp, yp, _)) in enumerate(zip(ph, gh)):
        a[2 * i] = [x, y, 1, 0, 0, 0, -xp * x, -xp * y, -xp]
        a[2 * i + 1] = [0, 0, 0, x, y, 1, -yp * x, -yp * y, -yp]

    _, sv, vt = np.linalg.svd(a)
    # a rank below 8 means the configuration does not pin down a homography
    if sv[6] <= 1e-9 * sv[0]:
        raise GeorefError("rank-deficient correspondence configuration")
    hn = vt[-1].reshape(3, 3)
    h = np.linalg.inv(t_geo) @ hn @ t_px
    try:
        return Homography(h)
    except GeorefError:
        raise GeorefError("rank-deficient correspondence configuration") from None


def reprojection_residual(h: Homography, correspondences) -> float:
    """Mean Euclidean error, in geo units, of H applied to each pixel."""
    errs = []
    for pixel, geo in correspondences:
        x, y = h.project(pixel)
        errs.append(math.hypot(x - geo[0], y - geo[1]))
    if not errs:
        raise GeorefError("no correspondences given")
    return float(np.mean(errs))


def apply_homography(h: Homography, pixel) -> GeoPoint:
    """Map a pixel to a range-checked geographic point (lon, lat order inside H)."""
    lon, lat = h.project(pixel)
    return GeoPoint(lat=lat, lon=lon)


def select_key_pixel(mask, strategy: str = "bottom-center-bbox") -> tuple[int, int]:
    """Pick the mask pixel used for geolocation; always returns a set bit.

    bottom-center-bbox: bottom row of the mask, horizontally centered between
    that row's set extremes (snapped to the nearest set bit).
    bottom-of-centroid-column: mask column centroid, bottom set bit of that
    column (nearest set column when it is empty).
    """
    bits = mask.bits
    rows = np.flatnonzero(bits.any(axis=1))
    if rows.size == 0:
        raise GeorefError("empty mask")
    bottom = int(rows[-1])

    if strategy == "bottom-center-bbox":
        cols = np.flatnonzero(bits[bottom])
        mid = (int(cols[0]) + int(cols[-1])) // 2
        if not bits[bottom, mid]:
            mid = int(cols[np.argmin(np.abs(cols - mid))])
        return mid, bottom

    if strategy == "bottom-of-centroid-column":
        set_cols = np.flatnonzero(bits.any(axis=0))
        col_idx = np.nonzero(bits)[1]
        col = int(np.floor(col_idx.mean() + 0.5))
        if not bits[:, col].any():
            col = int(set_cols[np.argmin(np.abs(set_cols - col))])
        row = int(np.flatnonzero(bits[:, col])[-1])
        return col, row

    raise GeorefError(f"unknown key-pixel strategy {strategy!r}")


def make_placement(geo: GeoPoint, ais: AisRecord, model_uri: str,
                   rotation_angles, source_pixel) -> PlacementRecord:
    if ais.length_m is None:
        raise GeorefError("length_m required")
    return PlacementRecord(
        position=geo,
        length_m=float(ais.length_m),
        rotation_angles=tuple(float(a) for a in rotation_angles),
        model_uri=str(model_uri),
        source_pixel=(int(source_pixel[0]), int(source_pixel[1])),
    )


def feature_collection(records) -> dict:
    return {
        "type": "FeatureCollection",
        "features": [r.to_geojson_feature() for r in records],
    }


def lonlat_to_mercator(geo: GeoPoint) -> tuple[float, float]:
    """Spherical web-mercator meters: x = R*lon, y = R*ln(tan(pi/4 + lat/2)).

    The y term uses the equivalent asinh(tan(lat)) form, which is exact at
    the equator and odd-symmetric in latitude.
    """
    if abs(geo.lat) >= MERCATOR_MAX_LAT_DEG:
        raise GeorefError(f"latitude {geo.lat} outside mercator domain")
    x = EARTH_RADIUS_M * math.radians(geo.lon)
    y = EARTH_RADIUS_M * math.asinh(math.tan(math.radians(geo.lat)))
    return x, y


def mercator_to_lonlat(x: float, y: float) -> GeoPoint:
    """Inverse spherical web-mercator."""
    lon = math.degrees(x / EARTH_RADIUS_M)
    lat = math.degrees(2.0 * math.atan(math.exp(y / EARTH_RADIUS_M)) - math.pi / 2.0)
    return GeoPoint(lat=lat, lon=lon)


def load_calibration(path) -> tuple[Homography, float | None]:
    """Load calibration JSON: either correspondences or a literal matrix.

    Returns (homography, mean reprojection residual) with residual None for
    literal matrices.
    """
    with open(Path(path), "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if "matrix" in doc:
        return Homography(np.asarray(doc["matrix"], dtype=np.float64)), None
    if "correspondences" in doc:
        pairs = [((c["px"][0], c["px"][1]), (c["geo"][0], c["geo"][1]))
                 for c in doc["correspondences"]]
        h = estimate_homography(pairs)
        return h, reprojection_residual(h, pairs)
    raise GeorefError("calibration JSON needs 'correspondences' or 'matrix'")


def load_ais(path) -> AisRecord:
    """Load AIS JSON: {"length_m": float, "lat": opt, "lon": opt, "identity": opt}."""
    with open(Path(path), "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return AisRecord(
        length_m=doc.get("length_m"),
        lat=doc.get("lat"),
        lon=doc.get("lon"),
        identity=doc.get("identity"),
    )

import json
import math

import numpy as np
import pytest

from ship3d.georef import (
    AisRecord,
    GeoPoint,
    GeorefError,
    Homography,
    apply_homography,
    estimate_homography,
    feature_collection,
    load_ais,
    load_calibration,
    lonlat_to_mercator,
    make_placement,
    mercator_to_lonlat,
    reprojection_residual,
    select_key_pixel,
)
from ship3d.raster import BinaryMask

from conftest import random_mask


def random_projective(rng, projective_scale=2e-4):
    """Well-conditioned random homography over the pixel box [0, 1000]^2."""
    a = rng.uniform(0.5, 2.0) * (1 if rng.random() < 0.5 else -1)
    d = rng.uniform(0.5, 2.0) * (1 if rng.random() < 0.5 else -1)
    h = np.array([
        [a, rng.uniform(-0.3, 0.3), rng.uniform(-100, 100)],
        [rng.uniform(-0.3, 0.3), d, rng.uniform(-100, 100)],
        [rng.uniform(-1, 1) * projective_scale, rng.uniform(-1, 1) * projective_scale, 1.0],
    ])
    return h


def project(h, uv):
    x, y, w = h @ (uv[0], uv[1], 1.0)
    return x / w, y / w


def exact_correspondences(rng, h, n):
    px = rng.uniform(0, 1000, (n, 2))
    return [((u, v), project(h, (u, v))) for u, v in px]


# -- estimation -------------------------------------------------------------


def test_identity_from_four_points():
    pairs = [((0, 0), (0, 0)), ((10, 0), (10, 0)), ((0, 10), (0, 10)), ((10, 10), (10, 10))]
    h = estimate_homography(pairs)
    assert np.allclose(h.matrix, np.eye(3), atol=1e-9)


def test_recovers_known_projective_maps(rng):
    for _ in range(20):
        h_true = random_projective(rng)
        pairs = exact_correspondences(rng, h_true, 12)
        h_est = estimate_homography(pairs)
        errs = [math.hypot(*np.subtract(h_est.project(p), g)) for p, g in pairs]
        assert max(errs) < 1e-6
        # held-out point round trip
        held = (rng.uniform(0, 1000), rng.uniform(0, 1000))
        assert math.hypot(*np.subtract(h_est.project(held), project(h_true, held))) < 1e-6


def test_three_points_insufficient():
    with pytest.raises(GeorefError, match="at least 4"):
        estimate_homography([((0, 0), (0, 0)), ((1, 0), (1, 0)), ((0, 1), (0, 1))])


def test_collinear_configuration_rejected():
    pairs = [((i, 0), (i, 0)) for i in range(4)]  # all on one line
    with pytest.raises(GeorefError, match="rank-deficient|singular"):
        estimate_homography(pairs)


def test_normalization_invariance(rng):
    h_true = random_projective(rng)
    pairs = exact_correspondences(rng, h_true, 10)
    h_a = estimate_homography(pairs)

    # offset + scale the pixel coordinates, estimate, then undo via composition
    s, bx, by = 37.0, 1234.5, -987.0
    shifted = [(((u * s + bx), (v * s + by)), g) for (u, v), g in pairs]
    h_b = estimate_homography(shifted)
    for (u, v), _ in pairs:
        pa = h_a.project((u, v))
        pb = h_b.project((u * s + bx, v * s + by))
        assert math.hypot(pa[0] - pb[0], pa[1] - pb[1]) < 1e-8


def test_residual_reported(rng):
    h_true = random_projective(rng)
    pairs = exact_correspondences(rng, h_true, 8)
    h_est = estimate_homography(pairs)
    assert reprojection_residual(h_est, pairs) < 1e-8


# -- application ------------------------------------------------------------


def test_apply_identity_passthrough():
    h = Homography(np.eye(3))
    geo = apply_homography(h, (8.5, 53.0))
    assert geo.lon == pytest.approx(8.5)
    assert geo.lat == pytest.approx(53.0)


def test_apply_diagonal_scaling():
    h = Homography(np.diag([0.5, 0.5, 1.0]))
    geo = apply_homography(h, (20.0, 100.0))
    assert (geo.lon, geo.lat) == (10.0, 50.0)


def test_apply_point_at_infinity():
    h = Homography(np.array([[1.0, 0, 0], [0, 1.0, 0], [0, -1.0, 1.0]]))
    with pytest.raises(GeorefError, match="infinity"):
        apply_homography(h, (0.0, 1.0))


def test_apply_out_of_range():
    h = Homography(np.diag([10.0, 10.0, 1.0]))
    with pytest.raises(GeorefError, match="out of range"):
        apply_homography(h, (100.0, 100.0))


def test_singular_matrix_rejected():
    with pytest.raises(GeorefError, match="singular"):
        Homography(np.array([[1.0, 0, 0], [2.0, 0, 0], [0, 0, 1.0]]))


# -- key pixel --------------------------------------------------------------


def test_key_pixel_rectangle():
    bits = np.zeros((5, 10), dtype=bool)
    bits[0:5, 0:10] = True
    assert select_key_pixel(BinaryMask(bits)) == (4, 4)


def test_key_pixel_single_bit():
    bits = np.zeros((10, 10), dtype=bool)
    bits[7, 3] = True
    assert select_key_pixel(BinaryMask(bits)) == (3, 7)
    assert select_key_pixel(BinaryMask(bits), "bottom-of-centroid-column") == (3, 7)


def test_key_pixel_random_blob(rng):
    for _ in range(30):
        mask = random_mask(rng, int(rng.integers(2, 40)), int(rng.integers(2, 40)), 0.2)
        if mask.count() == 0:
            continue
        for strategy in ("bottom-center-bbox", "bottom-of-centroid-column"):
            col, row = select_key_pixel(mask, strategy)
            assert mask.bits[row, col]
        col, row = select_key_pixel(mask)
        # bottom-center-bbox: the row is the mask's maximal set row (exhaustive scan)
        max_row = max(r for r in range(mask.height) if mask.bits[r].any())
        assert row == max_row


def test_key_pixel_empty_mask():
    with pytest.raises(GeorefError, match="empty"):
        select_key_pixel(BinaryMask(np.zeros((3, 3), bool)))


def test_key_pixel_unknown_strategy():
    bits = np.ones((2, 2), dtype=bool)
    with pytest.raises(GeorefError, match="strategy"):
        select_key_pixel(BinaryMask(bits), "top-left")


# -- placements -------------------------------------------------------------


def test_placement_feature_roundtrip(tmp_path):
    record = make_placement(
        GeoPoint(lat=53.0, lon=8.5),
        AisRecord(length_m=50.0),
        "ship.ply",
        (math.pi / 2, math.pi, math.pi),
        (12, 34),
    )
    doc = feature_collection([record])
    path = tmp_path / "placement.geojson"
    path.write_text(json.dumps(doc), encoding="utf-8")

    # parse back with the stdlib JSON parser as the independent reader
    back = json.loads(path.read_text(encoding="utf-8"))
    assert back["type"] == "FeatureCollection"
    feat = back["features"][0]
    assert feat["type"] == "Feature"
    assert feat["geometry"] == {"type": "Point", "coordinates": [8.5, 53.0]}
    props = feat["properties"]
    assert props["length_m"] == 50.0
    assert props["model_uri"] == "ship.ply"
    assert props["source_pixel"] == [12, 34]
    assert props["rotation_angles"] == [math.pi / 2, math.pi, math.pi]


def test_placement_zero_length_rejected():
    with pytest.raises(GeorefError):
        make_placement(GeoPoint(lat=0.0, lon=0.0), AisRecord(), "m.ply", (0, 0, 0), (0, 0))
    with pytest.raises(GeorefError):
        AisRecord(length_m=0.0)


def test_geopoint_ranges():
    with pytest.raises(GeorefError):
        GeoPoint(lat=91.0, lon=0.0)
    with pytest.raises(GeorefError):
        GeoPoint(lat=0.0, lon=-181.0)


# -- mercator ---------------------------------------------------------------


def test_mercator_origin():
    assert lonlat_to_mercator(GeoPoint(lat=0.0, lon=0.0)) == (0.0, 0.0)


def test_mercator_antimeridian():
    x, y = lonlat_to_mercator(GeoPoint(lat=0.0, lon=180.0))
    assert x == pytest.approx(math.pi * 6378137.0)
    assert x == pytest.approx(20037508.342789244)
    assert y == pytest.approx(0.0, abs=1e-9)


def test_mercator_odd_symmetry(rng):
    for _ in range(10):
        lat = float(rng.uniform(0, 85))
        _, y_pos = lonlat_to_mercator(GeoPoint(lat=lat, lon=0.0))
        _, y_neg = lonlat_to_mercator(GeoPoint(lat=-lat, lon=0.0))
        assert y_neg == pytest.approx(-y_pos, rel=1e-12)


def test_mercator_inverse_roundtrip(rng):
    for _ in range(50):
        lat = float(rng.uniform(-85, 85))
        lon = float(rng.uniform(-180, 180))
        x, y = lonlat_to_mercator(GeoPoint(lat=lat, lon=lon))
        back = mercator_to_lonlat(x, y)
        assert abs(back.lat - lat) < 1e-9
        assert abs(back.lon - lon) < 1e-9


def test_mercator_domain_limit():
    with pytest.raises(GeorefError, match="mercator"):
        lonlat_to_mercator(GeoPoint(lat=89.0, lon=0.0))


# -- config files -----------------------------------------------------------


def test_load_calibration_correspondences(tmp_path, rng):
    h_true = random_projective(rng)
    pairs = exact_correspondences(rng, h_true, 6)
    doc = {"correspondences": [{"px": list(p), "geo": list(g)} for p, g in pairs]}
    path = tmp_path / "calib.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    h, residual = load_calibration(path)
    assert residual < 1e-8
    assert math.hypot(*np.subtract(h.project((5, 5)), project(h_true, (5, 5)))) < 1e-6


def test_load_calibration_matrix(tmp_path):
    path = tmp_path / "calib.json"
    path.write_text(json.dumps({"matrix": np.eye(3).tolist()}), encoding="utf-8")
    h, residual = load_calibration(path)
    assert residual is None
    assert np.allclose(h.matrix, np.eye(3))


def test_load_ais(tmp_path):
    path = tmp_path / "ais.json"
    path.write_text('{"length_m": 50.0, "lat": 53.0, "lon": 8.5}', encoding="utf-8")
    ais = load_ais(path)
    assert (ais.length_m, ais.lat, ais.lon) == (50.0, 53.0, 8.5)

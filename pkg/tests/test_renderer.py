import numpy as np

from ship3d.camera_rig import CameraIntrinsics, CameraPose, look_at
from ship3d.postprocess import rotation_matrix
from ship3d.renderer import RenderConfig, render_points
from ship3d.splat_io import StandardPointCloud


def camera_on_z(distance=1.0, width=128, height=128):
    intr = CameraIntrinsics(width=width, height=height)
    return CameraPose(look_at((0.0, 0.0, distance), (0.0, 0.0, 0.0), (0.0, 1.0, 0.0)), intr)


def empty_cloud():
    return StandardPointCloud(np.empty((0, 3)), np.empty((0, 3), np.uint8))


def test_empty_cloud_renders_background():
    img, depth = render_points(empty_cloud(), camera_on_z())
    assert np.all(img.pixels == 128)
    assert np.all(np.isinf(depth))


def test_single_point_lands_at_center():
    cloud = StandardPointCloud([[0.0, 0.0, 0.0]], [[255, 0, 0]])
    img, depth = render_points(cloud, camera_on_z(), RenderConfig(point_radius_px=0))
    assert tuple(img.pixels[64, 64]) == (255, 0, 0)
    assert depth[64, 64] == 1.0
    # only one pixel written
    assert (img.pixels != 128).any(axis=2).sum() == 1


def test_nearer_point_wins_depth():
    cloud = StandardPointCloud(
        [[0.0, 0.0, 0.0], [0.0, 0.0, 0.5]],
        [[10, 10, 10], [200, 200, 200]],
    )
    img, depth = render_points(cloud, camera_on_z(), RenderConfig(point_radius_px=0))
    # camera at z=1: second point is at depth 0.5, first at 1.0
    assert tuple(img.pixels[64, 64]) == (200, 200, 200)
    assert depth[64, 64] == 0.5


def test_equal_depth_lower_index_wins():
    cloud = StandardPointCloud(
        [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
        [[1, 2, 3], [4, 5, 6]],
    )
    img, _ = render_points(cloud, camera_on_z(), RenderConfig(point_radius_px=0))
    assert tuple(img.pixels[64, 64]) == (1, 2, 3)


def test_near_far_culling():
    # powers of two keep the camera-space z values exact
    intr = CameraIntrinsics(z_near=0.25, z_far=2.0)
    cam = CameraPose(look_at((0.0, 0.0, 1.0), (0.0, 0.0, 0.0), (0.0, 1.0, 0.0)), intr)

    def center_written(z_world):
        cloud = StandardPointCloud([[0.0, 0.0, z_world]], [[255, 0, 0]])
        img, _ = render_points(cloud, cam, RenderConfig(point_radius_px=0))
        return tuple(img.pixels[64, 64]) == (255, 0, 0)

    assert not center_written(0.875)   # z_cam = -0.125, in front of near plane
    assert not center_written(0.75)    # exactly on the near plane: culled
    assert center_written(0.5)         # inside the frustum
    assert center_written(-1.0)        # exactly on the far plane: kept
    assert not center_written(-1.5)    # beyond the far plane


def test_splat_radius():
    cloud = StandardPointCloud([[0.0, 0.0, 0.0]], [[9, 9, 9]])
    img, _ = render_points(cloud, camera_on_z(), RenderConfig(point_radius_px=2))
    written = (img.pixels != 128).any(axis=2)
    assert written.sum() == 25  # (2r+1)^2
    assert written[62:67, 62:67].all()


def test_deterministic_across_runs(rng):
    cloud = StandardPointCloud(
        rng.uniform(-0.4, 0.4, (500, 3)),
        rng.integers(0, 256, (500, 3), dtype=np.uint8),
    )
    cam = camera_on_z()
    img_a, depth_a = render_points(cloud, cam)
    img_b, depth_b = render_points(cloud, cam)
    assert np.array_equal(img_a.pixels, img_b.pixels)
    assert np.array_equal(depth_a, depth_b)


def test_pose_geometry_duality(rng):
    cloud = StandardPointCloud(
        rng.uniform(-0.4, 0.4, (300, 3)),
        rng.integers(0, 256, (300, 3), dtype=np.uint8),
    )
    cam = camera_on_z()

    r = rotation_matrix((0.3, -1.1, 2.0))
    rotated = StandardPointCloud(cloud.positions @ r.T, cloud.colors)
    # pre-compose the camera with the inverse rotation: W2C' = W2C @ R^-1
    r_inv_h = np.eye(4)
    r_inv_h[:3, :3] = r.T
    cam_rot = CameraPose(cam.world_to_camera @ r_inv_h, cam.intrinsics)

    img_a, depth_a = render_points(cloud, cam)
    img_b, depth_b = render_points(rotated, cam_rot)
    # the image is pixel-identical; depth floats may differ at rounding level
    assert np.array_equal(img_a.pixels, img_b.pixels)
    assert np.allclose(depth_a, depth_b, atol=1e-9)

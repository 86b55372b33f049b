"""Synthetic-render camera setup: hemisphere viewpoints and perspective intrinsics.

Viewpoints are drawn on the upper hemisphere (z > 0) of radius sqrt(3)/2,
which circumscribes a unit cube centered at the origin. Sampling is
area-uniform (uniform in z), driven by a splitmix64 generator so pose lists
are bit-reproducible across runs and across implementations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

UNIT_CUBE_HEMISPHERE_RADIUS = math.sqrt(3.0) / 2.0

_MASK64 = (1 << 64) - 1


@dataclass
class CameraIntrinsics:
    fov_deg: float = 45.0
    z_near: float = 0.01
    z_far: float = 2.0
    width: int = 128
    height: int = 128

    def __post_init__(self) -> None:
        if not 0.0 < self.fov_deg < 180.0:
            raise ValueError("fov_deg must be in (0, 180)")
        if not 0.0 < self.z_near < self.z_far:
            raise ValueError("need 0 < z_near < z_far")
        if self.width < 1 or self.height < 1:
            raise ValueError("image size must be >= 1")


@dataclass(eq=False)
class CameraPose:
    world_to_camera: np.ndarray  # 4x4 rigid transform, camera looks down -Z
    intrinsics: CameraIntrinsics

    def __post_init__(self) -> None:
        m = np.asarray(self.world_to_camera, dtype=np.float64)
        if m.shape != (4, 4):
            raise ValueError("world_to_camera must be 4x4")
        r = m[:3, :3]
        if not np.allclose(r @ r.T, np.eye(3), atol=1e-9) or np.linalg.det(r) < 0.0:
            raise ValueError("rotation block must be orthonormal with det +1")
        self.world_to_camera = m


class SplitMix64:
    """Deterministic 64-bit generator (splitmix64), documented for reproducibility.

    next_float() returns the top 53 bits scaled into [0, 1).
    """

    GAMMA = 0x9E3779B97F4A7C15

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + self.GAMMA) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return (z ^ (z >> 31)) & _MASK64

    def next_float(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))


def look_at(eye, target, up) -> np.ndarray:
    """Build a 4x4 world-to-camera transform: camera at eye looking down -Z at target."""
    eye = np.asarray(eye, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    up = np.asarray(up, dtype=np.float64)
    forward = target - eye
    norm = np.linalg.norm(forward)
    if norm == 0.0:
        raise ValueError("eye and target coincide")
    forward = forward / norm
    side = np.cross(forward, up)
    s_norm = np.linalg.norm(side)
    if s_norm < 1e-12:
        raise ValueError("up vector is parallel to the view direction")
    side = side / s_norm
    cam_up = np.cross(side, forward)

    m = np.eye(4)
    m[0, :3] = side
    m[1, :3] = cam_up
    m[2, :3] = -forward
    m[:3, 3] = -(m[:3, :3] @ eye)
    return m


def hemisphere_eye_points(n: int, seed: int,
                          radius: float = UNIT_CUBE_HEMISPHERE_RADIUS) -> np.ndarray:
    """Deterministic (n, 3) eye positions on the upper hemisphere (z > 0).

    Azimuth ~ U[0, 2pi); height z = radius * u with u ~ U(0, 1], which is
    area-uniform on the sphere.
    """
    if n < 1:
        raise ValueError("need n >= 1 samples")
    rng = SplitMix64(seed)
    eyes = np.empty((n, 3))
    for i in range(n):
        phi = 2.0 * math.pi * rng.next_float()
        u = 1.0 - rng.next_float()  # (0, 1]: keeps the eye strictly above z=0
        z = radius * u
        ring = math.sqrt(max(radius * radius - z * z, 0.0))
        eyes[i] = (ring * math.cos(phi), ring * math.sin(phi), z)
    return eyes


def sample_hemisphere_cameras(n: int = 16, seed: int = 0,
                              radius: float = UNIT_CUBE_HEMISPHERE_RADIUS,
                              intr: CameraIntrinsics | None = None) -> list[CameraPose]:
    """Sample n look-at-origin cameras on the upper hemisphere of the given radius.

    Eyes come from hemisphere_eye_points. Up is +Y, falling back to +X when
    the eye is nearly on the Y axis.
    """
    intr = intr or CameraIntrinsics()
    poses = []
    for eye in hemisphere_eye_points(n, seed, radius):
        up = (0.0, 1.0, 0.0)
        if abs(eye[1]) / radius > 0.999:
            up = (1.0, 0.0, 0.0)
        poses.append(CameraPose(look_at(eye, (0.0, 0.0, 0.0), up), intr))
    return poses


def projection_matrix(intr: CameraIntrinsics) -> np.ndarray:
    """Symmetric-frustum perspective projection (vertical FOV).

    Maps camera-space z = -z_near to NDC depth -1 and z = -z_far to +1.
    """
    f = 1.0 / math.tan(math.radians(intr.fov_deg) / 2.0)
    aspect = intr.width / intr.height
    zn, zf = intr.z_near, intr.z_far
    m = np.zeros((4, 4))
    m[0, 0] = f / aspect
    m[1, 1] = f
    m[2, 2] = -(zf + zn) / (zf - zn)
    m[2, 3] = -2.0 * zf * zn / (zf - zn)
    m[3, 2] = -1.0
    return m


def pose_to_dict(pose: CameraPose) -> dict:
    return {"world_to_camera": pose.world_to_camera.tolist()}


def poses_to_json_dict(poses: list[CameraPose]) -> dict:
    """JSON document for the cameras CLI: shared intrinsics + matrix list."""
    if not poses:
        raise ValueError("no poses")
    intr = poses[0].intrinsics
    return {
        "intrinsics": {
            "fov_deg": intr.fov_deg,
            "z_near": intr.z_near,
            "z_far": intr.z_far,
            "width": intr.width,
            "height": intr.height,
        },
        "cameras": [pose_to_dict(p) for p in poses],
    }


def poses_from_json_dict(doc: dict) -> list[CameraPose]:
    intr = CameraIntrinsics(**doc["intrinsics"])
    return [CameraPose(np.asarray(c["world_to_camera"], dtype=np.float64), intr)
            for c in doc["cameras"]]

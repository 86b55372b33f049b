"""Shared fixture builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from ship3d.raster import BinaryMask, RgbImage
from ship3d.splat_io import GaussianSplatCloud


def random_gaussian_cloud(rng: np.random.Generator, n: int) -> GaussianSplatCloud:
    """Random but invariant-satisfying cloud (finite, nonzero quaternions)."""
    rotations = rng.standard_normal((n, 4)).astype(np.float32)
    if n:
        # keep quaternion norms comfortably away from zero
        rotations[:, 0] += np.sign(rotations[:, 0] + 0.5) * 0.25
    return GaussianSplatCloud(
        positions=rng.standard_normal((n, 3)).astype(np.float32),
        opacity_logits=rng.uniform(-8.0, 4.0, n).astype(np.float32),
        scales=rng.standard_normal((n, 3)).astype(np.float32),
        rotations=rotations,
        f_dc=rng.uniform(-2.0, 2.0, (n, 3)).astype(np.float32),
    )


def random_rgb_image(rng: np.random.Generator, w: int, h: int) -> RgbImage:
    return RgbImage(rng.integers(0, 256, (h, w, 3), dtype=np.uint8))


def random_mask(rng: np.random.Generator, w: int, h: int, p: float = 0.3) -> BinaryMask:
    return BinaryMask(rng.random((h, w)) < p)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240531)


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion at the end of the run."""
    lines = []
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" in nodeid and report.when == "call":
                name = nodeid.split("::")[-1].replace("test_accept_", "")
                lines.append((name, status.upper()))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, status in sorted(lines):
            terminalreporter.write_line(f"ACCEPTANCE {name}: {status}")

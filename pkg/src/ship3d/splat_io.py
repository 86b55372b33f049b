"""PLY I/O for Gaussian-splat clouds and standard xyz+RGB point clouds.

Gaussian clouds use the property names found in real splat network exports
(``opacity``, ``scale_0..2``, ``rot_0..3``, ``f_dc_0..2``) so those files
load unmodified. Opacity is kept in logit (pre-sigmoid) domain throughout.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

# Degree-0 spherical-harmonic basis constant, 1 / (2 * sqrt(pi)).
SH_C0 = 0.28209479177387814

# Scalar types allowed in a PLY header, mapped to little-endian numpy codes.
_PLY_SCALAR_TYPES = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2",
    "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4",
    "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}

_GAUSSIAN_REQUIRED = (
    "x", "y", "z", "opacity",
    "scale_0", "scale_1", "scale_2",
    "rot_0", "rot_1", "rot_2", "rot_3",
)
_COLOR_SH = ("f_dc_0", "f_dc_1", "f_dc_2")
_COLOR_BYTES = ("red", "green", "blue")


class PlyError(ValueError):
    """Malformed, unsupported, or truncated PLY data."""


class InvariantError(ValueError):
    """A cloud value violates its type invariants (non-finite, zero quaternion, ...)."""


@dataclass(eq=False)
class GaussianSplatCloud:
    """Raw splat network output: per-point position, opacity logit, scale, rotation, SH-DC color.

    Scales (log domain) and rotations (quaternions) are carried opaquely;
    this toolkit never interprets them, only filters and re-exports.
    """

    positions: np.ndarray      # (N, 3) float32
    opacity_logits: np.ndarray  # (N,)  float32
    scales: np.ndarray         # (N, 3) float32
    rotations: np.ndarray      # (N, 4) float32
    f_dc: np.ndarray           # (N, 3) float32

    def __post_init__(self) -> None:
        self.positions = np.asarray(self.positions, dtype=np.float32).reshape(-1, 3)
        self.opacity_logits = np.asarray(self.opacity_logits, dtype=np.float32).reshape(-1)
        self.scales = np.asarray(self.scales, dtype=np.float32).reshape(-1, 3)
        self.rotations = np.asarray(self.rotations, dtype=np.float32).reshape(-1, 4)
        self.f_dc = np.asarray(self.f_dc, dtype=np.float32).reshape(-1, 3)
        n = len(self.positions)
        for name in ("opacity_logits", "scales", "rotations", "f_dc"):
            if len(getattr(self, name)) != n:
                raise InvariantError(f"per-point list length mismatch: {name}")

    def __len__(self) -> int:
        return len(self.positions)

    def validate(self) -> None:
        """Raise InvariantError on non-finite values or zero-norm quaternions."""
        for name in ("positions", "opacity_logits", "scales", "rotations", "f_dc"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise InvariantError(f"non-finite value in {name}")
        if len(self) and np.any(np.linalg.norm(self.rotations, axis=1) == 0.0):
            raise InvariantError("zero-norm quaternion in rotations")

    def take(self, index: np.ndarray) -> "GaussianSplatCloud":
        """Select points by boolean mask or index array, all attributes in lockstep."""
        return GaussianSplatCloud(
            positions=self.positions[index],
            opacity_logits=self.opacity_logits[index],
            scales=self.scales[index],
            rotations=self.rotations[index],
            f_dc=self.f_dc[index],
        )


@dataclass(eq=False)
class StandardPointCloud:
    """Export form: xyz in meters, RGB bytes, normals identically zero."""

    positions: np.ndarray            # (N, 3) float
    colors: np.ndarray               # (N, 3) uint8
    normals: np.ndarray = field(default=None)  # (N, 3), always zero

    def __post_init__(self) -> None:
        self.positions = np.asarray(self.positions, dtype=np.float64).reshape(-1, 3)
        self.colors = np.asarray(self.colors, dtype=np.uint8).reshape(-1, 3)
        if self.normals is None:
            self.normals = np.zeros_like(self.positions, dtype=np.float32)
        self.normals = np.asarray(self.normals, dtype=np.float32).reshape(-1, 3)
        n = len(self.positions)
        if len(self.colors) != n or len(self.normals) != n:
            raise InvariantError("per-point list length mismatch")
        if np.any(self.normals != 0.0):
            raise InvariantError("normals must be identically zero")

    def __len__(self) -> int:
        return len(self.positions)


def sh_dc_to_rgb(f_dc) -> np.ndarray:
    """Convert degree-0 SH color coefficients to RGB bytes.

    Each channel is round(255 * clamp01(0.5 + SH_C0 * f_dc_i)).
    Accepts a single 3-vector or an (N, 3) array.
    """
    f = np.asarray(f_dc, dtype=np.float64)
    rgb = np.clip(0.5 + SH_C0 * f, 0.0, 1.0)
    return np.rint(255.0 * rgb).astype(np.uint8)


def rgb_to_sh_dc(rgb) -> np.ndarray:
    """Inverse of sh_dc_to_rgb up to byte quantization: (c/255 - 0.5) / SH_C0."""
    c = np.asarray(rgb, dtype=np.float64)
    return ((c / 255.0 - 0.5) / SH_C0).astype(np.float32)


def _parse_header(data: bytes):
    """Parse a PLY header.

    Returns (fmt, vertex_count, properties, payload_offset) where properties
    is a list of (numpy_dtype_code, name) for the vertex element.
    """
    end_marker = b"end_header\n"
    end = data.find(end_marker)
    if not data.startswith(b"ply\n") and not data.startswith(b"ply\r\n"):
        raise PlyError("not a PLY file (missing 'ply' magic)")
    if end < 0:
        raise PlyError("missing end_header")
    header_lines = data[:end].decode("ascii", errors="replace").splitlines()
    payload_offset = end + len(end_marker)

    fmt = None
    vertex_count = None
    properties: list[tuple[str, str]] = []
    current_element = None
    first_element = None

    for raw in header_lines[1:]:
        line = raw.strip()
        if not line or line.startswith(("comment", "obj_info")):
            continue
        parts = line.split()
        if parts[0] == "format":
            if len(parts) != 3:
                raise PlyError(f"malformed format line: {line!r}")
            if parts[1] == "binary_big_endian":
                raise PlyError("binary_big_endian PLY is not supported")
            if parts[1] not in ("ascii", "binary_little_endian"):
                raise PlyError(f"unknown PLY format {parts[1]!r}")
            fmt = parts[1]
        elif parts[0] == "element":
            if len(parts) != 3:
                raise PlyError(f"malformed element line: {line!r}")
            current_element = parts[1]
            if first_element is None:
                first_element = parts[1]
            if parts[1] == "vertex":
                try:
                    vertex_count = int(parts[2])
                except ValueError:
                    raise PlyError(f"bad vertex count {parts[2]!r}") from None
                if vertex_count < 0:
                    raise PlyError("negative vertex count")
        elif parts[0] == "property":
            if current_element != "vertex":
                continue
            if parts[1] == "list":
                raise PlyError("list properties on the vertex element are not supported")
            if len(parts) != 3:
                raise PlyError(f"malformed property line: {line!r}")
            if parts[1] not in _PLY_SCALAR_TYPES:
                raise PlyError(f"unknown property type {parts[1]!r}")
            properties.append((_PLY_SCALAR_TYPES[parts[1]], parts[2]))
        else:
            raise PlyError(f"unrecognized header line: {line!r}")

    if fmt is None:
        raise PlyError("missing format line")
    if vertex_count is None:
        raise PlyError("missing 'element vertex' declaration")
    if first_element != "vertex":
        raise PlyError("vertex must be the first element")
    return fmt, vertex_count, properties, payload_offset


def _read_vertex_table(data: bytes, fmt: str, count: int, properties) -> np.ndarray:
    """Read the vertex payload into a structured array, one field per property."""
    dtype = np.dtype([(name, "<" + code) for code, name in properties])
    if fmt == "binary_little_endian":
        needed = count * dtype.itemsize
        payload = data[:needed]
        if len(payload) < needed:
            raise PlyError(
                f"declared vertex count {count} exceeds available data "
                f"({len(payload)} of {needed} bytes)"
            )
        return np.frombuffer(payload, dtype=dtype, count=count)

    # ASCII: stream whitespace-separated tokens; trailing tokens are ignored.
    n_fields = len(properties)
    tokens = data.split()
    needed = count * n_fields
    if len(tokens) < needed:
        raise PlyError(
            f"declared vertex count {count} exceeds available data "
            f"({len(tokens)} of {needed} values)"
        )
    table = np.empty(count, dtype=dtype)
    try:
        flat = np.array(tokens[:needed], dtype=np.float64).reshape(count, n_fields)
    except ValueError:
        raise PlyError("non-numeric token in ASCII vertex data") from None
    for j, (_, name) in enumerate(properties):
        table[name] = flat[:, j]
    return table


def read_gaussian_ply(data: bytes) -> GaussianSplatCloud:
    """Parse a Gaussian-splat PLY (ASCII or binary little-endian).

    Requires x, y, z, opacity, scale_0..2 and rot_0..3 vertex properties plus
    either f_dc_0..2 or red/green/blue (byte colors are mapped back into the
    SH-DC domain so the export conversion reproduces them exactly). Unknown
    extra properties are skipped; bytes past the declared count are ignored.
    """
    fmt, count, properties, offset = _parse_header(data)
    names = {name for _, name in properties}
    for req in _GAUSSIAN_REQUIRED:
        if req not in names:
            raise PlyError(f"missing required vertex property {req!r}")
    has_sh = all(p in names for p in _COLOR_SH)
    has_rgb = all(p in names for p in _COLOR_BYTES)
    if not has_sh and not has_rgb:
        raise PlyError("missing required vertex property 'f_dc_0'")

    table = _read_vertex_table(data[offset:], fmt, count, properties)

    def col(name):
        # copy: the binary path hands out read-only views into the input buffer
        return np.array(table[name], dtype=np.float32)

    if has_sh:
        f_dc = np.stack([col(p) for p in _COLOR_SH], axis=1) if count else np.empty((0, 3), np.float32)
    else:
        rgb = np.stack([table[p] for p in _COLOR_BYTES], axis=1) if count else np.empty((0, 3))
        f_dc = rgb_to_sh_dc(rgb)

    def vec(prefix_names):
        if count == 0:
            return np.empty((0, len(prefix_names)), np.float32)
        return np.stack([col(p) for p in prefix_names], axis=1)

    return GaussianSplatCloud(
        positions=vec(("x", "y", "z")),
        opacity_logits=col("opacity"),
        scales=vec(("scale_0", "scale_1", "scale_2")),
        rotations=vec(("rot_0", "rot_1", "rot_2", "rot_3")),
        f_dc=f_dc,
    )


def write_gaussian_ply(cloud: GaussianSplatCloud) -> bytes:
    """Serialize a Gaussian cloud as binary little-endian PLY.

    Refuses clouds that violate invariants (non-finite values, zero quaternions).
    """
    cloud.validate()
    n = len(cloud)
    names = ["x", "y", "z", "opacity", "scale_0", "scale_1", "scale_2",
             "rot_0", "rot_1", "rot_2", "rot_3", "f_dc_0", "f_dc_1", "f_dc_2"]
    header = ["ply", "format binary_little_endian 1.0", f"element vertex {n}"]
    header += [f"property float {p}" for p in names]
    header.append("end_header")

    table = np.empty(n, dtype=np.dtype([(p, "<f4") for p in names]))
    table["x"], table["y"], table["z"] = cloud.positions.T
    table["opacity"] = cloud.opacity_logits
    table["scale_0"], table["scale_1"], table["scale_2"] = cloud.scales.T
    table["rot_0"], table["rot_1"], table["rot_2"], table["rot_3"] = cloud.rotations.T
    table["f_dc_0"], table["f_dc_1"], table["f_dc_2"] = cloud.f_dc.T

    buf = io.BytesIO()
    buf.write(("\n".join(header) + "\n").encode("ascii"))
    buf.write(table.tobytes())
    return buf.getvalue()


def write_standard_ply(cloud: StandardPointCloud) -> bytes:
    """Serialize the export layout: x,y,z + zeroed nx,ny,nz (float32) + RGB bytes, binary LE."""
    n = len(cloud)
    header = [
        "ply", "format binary_little_endian 1.0", f"element vertex {n}",
        "property float x", "property float y", "property float z",
        "property float nx", "property float ny", "property float nz",
        "property uchar red", "property uchar green", "property uchar blue",
        "end_header",
    ]
    dtype = np.dtype([
        ("x", "<f4"), ("y", "<f4"), ("z", "<f4"),
        ("nx", "<f4"), ("ny", "<f4"), ("nz", "<f4"),
        ("red", "u1"), ("green", "u1"), ("blue", "u1"),
    ])
    table = np.zeros(n, dtype=dtype)
    pos = cloud.positions.astype(np.float32)
    table["x"], table["y"], table["z"] = pos.T
    table["red"], table["green"], table["blue"] = cloud.colors.T

    buf = io.BytesIO()
    buf.write(("\n".join(header) + "\n").encode("ascii"))
    buf.write(table.tobytes())
    return buf.getvalue()


def read_standard_ply(data: bytes) -> StandardPointCloud:
    """Parse a standard point cloud PLY (x,y,z [+ normals] + red/green/blue)."""
    fmt, count, properties, offset = _parse_header(data)
    names = {name for _, name in properties}
    for req in ("x", "y", "z", "red", "green", "blue"):
        if req not in names:
            raise PlyError(f"missing required vertex property {req!r}")
    table = _read_vertex_table(data[offset:], fmt, count, properties)
    if count == 0:
        return StandardPointCloud(np.empty((0, 3)), np.empty((0, 3), np.uint8))
    positions = np.stack([np.asarray(table[p], np.float64) for p in ("x", "y", "z")], axis=1)
    colors = np.stack([np.asarray(table[p], np.uint8) for p in ("red", "green", "blue")], axis=1)
    return StandardPointCloud(positions, colors)

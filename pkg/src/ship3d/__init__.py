"""ship3d: turn single-view ship splat reconstructions plus masks and AIS
metadata into scale-accurate, consistently oriented, georeferenced point
clouds, with deterministic rendering and image metrics for verification."""

from .camera_rig import (
    CameraIntrinsics,
    CameraPose,
    look_at,
    projection_matrix,
    sample_hemisphere_cameras,
)
from .georef import (
    AisRecord,
    GeoPoint,
    Homography,
    PlacementRecord,
    apply_homography,
    estimate_homography,
    lonlat_to_mercator,
    make_placement,
    mercator_to_lonlat,
    select_key_pixel,
)
from .metrics import MetricsReport, compute_report, mse, psnr, ssim
from .postprocess import (
    PostprocessConfig,
    canonical_rotate,
    export_chain,
    filter_by_opacity,
    recenter,
    scale_to_length,
)
from .preprocess import PreprocessConfig, standardize_ship_image
from .raster import BinaryMask, RgbImage, load_image, load_mask, mask_bbox, resize_bilinear, save_image
from .renderer import RenderConfig, render_points
from .splat_io import (
    GaussianSplatCloud,
    StandardPointCloud,
    read_gaussian_ply,
    read_standard_ply,
    sh_dc_to_rgb,
    write_gaussian_ply,
    write_standard_ply,
)

__version__ = "0.1.0"

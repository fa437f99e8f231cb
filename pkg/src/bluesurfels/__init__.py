"""Progressive blue surfels: prefix-orderable point approximations of triangle
scenes, with selection math, headless rendering, and evaluation tools."""

from .geometry import AABB
from .lodpipe import (
    LodPolicy,
    generate_lods,
    read_manifest,
    read_surfel_file,
    write_manifest,
    write_surfel_file,
)
from .metrics import DistanceStats, SsimResult, compute_r_m, min_neighbor_distances, ssim
from .prefixmath import (
    BudgetController,
    CameraModel,
    FoveaZones,
    PrefixModel,
    budget_update,
    foveated_size,
    prefix_for_radius,
    projected_pixel_distance,
    radius_for_screen,
    select_render_actions,
)
from .raster import CaptureConfig, GBuffer, GBufferSet, capture_gbuffers, rasterize_direction
from .renderer import FrameBuffer, render_frame, splat_surfels
from .sampling import (
    CandidateSet,
    SamplingConfig,
    Surfel,
    SurfelCloud,
    collect_candidates,
    exact_greedy_permutation,
    sample_progressive,
    sample_random,
)
from .scene import (
    LooseOctree,
    SceneNode,
    TriangleMesh,
    build_spatial_structure,
    load_mesh,
    node_bounds_world,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"

"""Runtime selection math: screen-space radius, prefix length, adaptive
surfel-size budget control, foveation zones, and the scene traversal that
turns a camera pose into render actions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .geometry import AABB
from .scene import SceneNode

BLEND_BETA = 0.3  # width of the parent/child blend ramp in r_min/r - 1


@dataclass
class PrefixModel:
    p_m: int
    r_m: float
    total: int

    def __post_init__(self):
        if self.p_m < 2:
            raise ValueError("p_m must be >= 2")
        if self.r_m <= 0.0:
            raise ValueError("r_m must be > 0")

    @staticmethod
    def from_cloud(cloud) -> "PrefixModel":
        return PrefixModel(p_m=min(cloud.p_m, cloud.count), r_m=cloud.r_m, total=cloud.count)

    @property
    def r_min(self) -> float:
        """Spacing when the full cloud is drawn; radii below this saturate."""
        return self.r_m * math.sqrt(self.p_m / self.total)


@dataclass
class CameraModel:
    """Pinhole or orthographic camera. Camera space: x right, y up, z backward
    (view direction is -z); screen y grows downward."""

    position: np.ndarray                  # (3,)
    rotation: np.ndarray                  # (3, 3) camera-to-world
    viewport: tuple[int, int]             # (width, height) pixels
    fov_y: float | None = None            # radians; None = orthographic
    ortho_height: float | None = None     # world units spanned vertically
    near: float = 1e-3

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64).reshape(3)
        self.rotation = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        if self.viewport[0] < 1 or self.viewport[1] < 1:
            raise ValueError("viewport must be positive")
        if (self.fov_y is None) == (self.ortho_height is None):
            raise ValueError("specify exactly one of fov_y or ortho_height")

    @staticmethod
    def look_at(position, target, up=(0.0, 1.0, 0.0), viewport=(512, 512),
                fov_y: float | None = math.radians(60.0),
                ortho_height: float | None = None) -> "CameraModel":
        position = np.asarray(position, dtype=np.float64)
        forward = np.asarray(target, dtype=np.float64) - position
        forward /= np.linalg.norm(forward)
        upv = np.asarray(up, dtype=np.float64)
        right = np.cross(forward, upv)
        if np.linalg.norm(right) < 1e-9:
            upv = np.array([0.0, 0.0, 1.0])
            right = np.cross(forward, upv)
        right /= np.linalg.norm(right)
        true_up = np.cross(right, forward)
        rot = np.stack([right, true_up, -forward], axis=1)
        return CameraModel(position, rot, viewport, fov_y=fov_y, ortho_height=ortho_height)

    @property
    def is_perspective(self) -> bool:
        return self.fov_y is not None

    @property
    def view_dir(self) -> np.ndarray:
        return -self.rotation[:, 2]

    @property
    def right(self) -> np.ndarray:
        return self.rotation[:, 0]

    @property
    def up(self) -> np.ndarray:
        return self.rotation[:, 1]

    @property
    def aspect(self) -> float:
        return self.viewport[0] / self.viewport[1]

    def to_camera(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        return (pts - self.position) @ self.rotation

    def project(self, points: np.ndarray):
        """Screen coordinates (pixels, y down) and positive-forward view depth."""
        v = self.to_camera(points)
        depth = -v[:, 2]
        w, h = self.viewport
        if self.is_perspective:
            tan_y = math.tan(self.fov_y * 0.5)
            safe = np.where(depth > 0.0, depth, 1.0)
            x_ndc = v[:, 0] / (safe * tan_y * self.aspect)
            y_ndc = v[:, 1] / (safe * tan_y)
        else:
            half_h = self.ortho_height * 0.5
            x_ndc = v[:, 0] / (half_h * self.aspect)
            y_ndc = v[:, 1] / half_h
        sx = (x_ndc * 0.5 + 0.5) * w
        sy = (0.5 - y_ndc * 0.5) * h
        return np.stack([sx, sy], axis=1), depth

    def pixel_world_size(self, depth: float) -> float:
        """World-space spacing of two adjacent pixels at the given view depth."""
        if self.is_perspective:
            return 2.0 * depth * math.tan(self.fov_y * 0.5) / self.viewport[1]
        return self.ortho_height / self.viewport[1]


def projected_pixel_distance(camera: CameraModel, node: SceneNode) -> float:
    """Spacing of two adjacent center pixels unprojected onto the plane through
    the node's closest bounds point, expressed in the node's local frame."""
    if camera.viewport[0] < 1 or camera.viewport[1] < 1:
        raise ValueError("degenerate viewport")
    bounds = node.bounds
    if bounds.is_empty():
        raise ValueError("node has no bounds")
    closest = bounds.closest_point(camera.position)
    t = float(np.dot(closest - camera.position, camera.view_dir))
    t = max(t, 0.0)  # camera inside bounds: plane through the camera position
    spacing = camera.pixel_world_size(t)
    q0 = camera.position + camera.view_dir * t
    q1 = q0 + camera.right * spacing
    inv = np.linalg.inv(node.transform)
    p0 = inv[:3, :3] @ q0 + inv[:3, 3]
    p1 = inv[:3, :3] @ q1 + inv[:3, 3]
    return float(np.linalg.norm(p1 - p0))


def radius_for_screen(s: float, d_p: float, as_printed: bool = False) -> float:
    """Object-space surfel radius for a desired on-screen size of s pixels.

    The dimensionally consistent reading (r grows with pixel footprint d_p) is
    the default; as_printed selects the r = s / (2 d_p) variant.
    """
    if d_p <= 0.0:
        raise ValueError("d_p must be > 0")
    if as_printed:
        return s / (2.0 * d_p)
    return s * d_p / 2.0


class PrefixResult(NamedTuple):
    p: int
    saturated: bool


def prefix_for_radius(model: PrefixModel, r: float) -> PrefixResult:
    """Prefix length covering the surface at surfel radius r: p_m * (r_m/r)^2,
    rounded half-up and clamped to [1, total]. Saturated means the cloud is too
    small to cover at this radius."""
    if r <= 0.0:
        raise ValueError("r must be > 0")
    estimate = model.p_m * (model.r_m / r) ** 2
    rounded = math.floor(estimate + 0.5)
    return PrefixResult(int(min(max(rounded, 1), model.total)), rounded > model.total)


@dataclass
class BudgetController:
    """Adaptive surfel-size feedback: 3-frame moving average, deadband, clamp."""

    t_target: float                       # ms per frame
    size: float = 4.0                     # current surfel size, px
    size_min: float = 1.0
    size_max: float = 8.0
    deadband: tuple[float, float] = (0.9, 1.1)
    window: list[float] = field(default_factory=list)  # last 3 sizes

    def __post_init__(self):
        if not self.window:
            self.window = [self.size] * 3


def budget_update(ctrl: BudgetController, t_frame: float) -> float:
    """Advance the controller by one frame; returns the new surfel size."""
    if t_frame <= 0.0:
        raise ValueError("t_frame must be > 0")
    ratio = t_frame / ctrl.t_target
    if not (ctrl.deadband[0] <= ratio <= ctrl.deadband[1]):
        s_old = sum(ctrl.window) / len(ctrl.window)
        s_new = (s_old * 3.0 + s_old * ratio) / 4.0
        ctrl.size = min(max(s_new, ctrl.size_min), ctrl.size_max)
    ctrl.window.pop(0)
    ctrl.window.append(ctrl.size)
    return ctrl.size


@dataclass
class FoveaZones:
    """Concentric screen-space rings around a fovea center. The surfel-size
    multiplier is defined at each ring radius and interpolated linearly between
    rings; inside the first ring the innermost multiplier holds, beyond the
    last the outermost one."""

    center: tuple[float, float]
    rings: list[tuple[float, float]]  # (radius_px, multiplier), radii increasing

    def __post_init__(self):
        radii = [r for r, _ in self.rings]
        if not self.rings:
            raise ValueError("need at least one zone ring")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise ValueError("ring radii must be strictly increasing")


def foveated_size(s: float, screen_center, zones: FoveaZones) -> float:
    dx = screen_center[0] - zones.center[0]
    dy = screen_center[1] - zones.center[1]
    d = math.hypot(dx, dy)
    radii = [r for r, _ in zones.rings]
    mults = [m for _, m in zones.rings]
    return s * float(np.interp(d, radii, mults))


# ---------------------------------------------------------------------------
# Render actions and traversal

@dataclass
class SurfelPrefix:
    count: int
    size: float       # on-screen size, px
    radius: float     # object-space disc radius used for selection


@dataclass
class Geometry:
    pass


@dataclass
class BlendParentChild:
    alpha: float


@dataclass
class Skip:
    pass


def _outside_frustum(camera: CameraModel, bounds: AABB) -> bool:
    if bounds.is_empty():
        return True
    v = camera.to_camera(bounds.corners())
    depth = -v[:, 2]
    if np.all(depth <= 0.0):
        return True
    if camera.is_perspective:
        tan_y = math.tan(camera.fov_y * 0.5)
        tan_x = tan_y * camera.aspect
        if (np.all(v[:, 0] < -tan_x * depth) or np.all(v[:, 0] > tan_x * depth)
                or np.all(v[:, 1] < -tan_y * depth) or np.all(v[:, 1] > tan_y * depth)):
            return True
    else:
        half_h = camera.ortho_height * 0.5
        half_w = half_h * camera.aspect
        if (np.all(v[:, 0] < -half_w) or np.all(v[:, 0] > half_w)
                or np.all(v[:, 1] < -half_h) or np.all(v[:, 1] > half_h)):
            return True
    return False


def _screen_center(camera: CameraModel, bounds: AABB):
    xy, depth = camera.project(bounds.center[None, :])
    if depth[0] <= 0.0:
        return (camera.viewport[0] * 0.5, camera.viewport[1] * 0.5)
    return (float(xy[0, 0]), float(xy[0, 1]))


def select_render_actions(scene: SceneNode, camera: CameraModel,
                          ctrl: BudgetController | None = None,
                          zones: FoveaZones | None = None,
                          surfel_size: float = 2.0,
                          as_printed: bool = False) -> list:
    """Depth-first traversal emitting (node, action) pairs.

    Visible LOD nodes whose cloud can cover at the computed radius are drawn as
    a surfel prefix without descending. Saturated clouds blend: the parent
    prefix is scaled by (1 - alpha) while children are rendered at weight
    alpha, with alpha ramping on r_min/r - 1.
    """
    base_size = ctrl.size if ctrl is not None else surfel_size
    actions: list = []

    def visit(node: SceneNode, weight: float):
        if _outside_frustum(camera, node.bounds):
            actions.append((node, Skip()))
            return
        cloud = node.lod
        if cloud is not None and cloud.count > 0 and cloud.r_m_valid:
            model = PrefixModel.from_cloud(cloud)
            s = base_size
            if zones is not None:
                s = foveated_size(base_size, _screen_center(camera, node.bounds), zones)
            d_p = projected_pixel_distance(camera, node)
            if d_p > 0.0:
                r = radius_for_screen(s, d_p, as_printed=as_printed)
                p, saturated = prefix_for_radius(model, r)
            else:
                r = 0.0
                saturated = True
            if not saturated:
                count = max(1, int(math.floor(p * weight + 0.5)))
                actions.append((node, SurfelPrefix(count, s, r)))
                return
            alpha = 1.0 if r <= 0.0 else min(max((model.r_min / r - 1.0) / BLEND_BETA, 0.0), 1.0)
            actions.append((node, BlendParentChild(alpha)))
            parent_count = int(math.floor((1.0 - alpha) * model.total * weight + 0.5))
            if parent_count >= 1:
                radius = r if r > 0.0 else model.r_min
                actions.append((node, SurfelPrefix(parent_count, s, radius)))
            if node.mesh is not None and node.mesh.triangle_count and alpha > 0.0:
                actions.append((node, Geometry()))
            for child in node.children:
                visit(child, weight * alpha)
            return
        if node.mesh is not None and node.mesh.triangle_count:
            actions.append((node, Geometry()))
        for child in node.children:
            visit(child, weight)

    visit(scene, 1.0)
    return actions

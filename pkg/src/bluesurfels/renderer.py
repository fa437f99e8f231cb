"""Headless CPU renderer: triangle geometry plus surfel prefixes drawn as
opaque oriented elliptic discs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import transform_directions, transform_points
from .prefixmath import CameraModel, Geometry, SurfelPrefix
from .raster import raster_triangles
from .scene import SceneNode

BACKGROUND = np.array([0.0, 0.0, 0.0, 1.0])


@dataclass
class FrameBuffer:
    width: int
    height: int
    color: np.ndarray  # (H, W, 4) float64
    depth: np.ndarray  # (H, W) float64, +inf cleared

    @staticmethod
    def create(width: int, height: int, background=BACKGROUND) -> "FrameBuffer":
        color = np.tile(np.asarray(background, dtype=np.float64), (height, width, 1))
        return FrameBuffer(width, height, color, np.full((height, width), np.inf))

    def rgb(self) -> np.ndarray:
        return self.color[..., :3]


def render_node_geometry(node: SceneNode, camera: CameraModel, fb: FrameBuffer) -> None:
    """Rasterize the node's own mesh (perspective-correct interpolation)."""
    mesh = node.mesh
    if mesh is None or not mesh.triangle_count:
        return
    world = transform_points(node.transform, mesh.positions)
    xy, depth = camera.project(world)
    in_front = depth > camera.near
    tris = mesh.triangles
    keep = in_front[tris[:, 0]] & in_front[tris[:, 1]] & in_front[tris[:, 2]]
    tris = tris[keep]
    if not len(tris):
        return
    if camera.is_perspective:
        inv_w = np.where(in_front, 1.0 / np.where(in_front, depth, 1.0), 0.0)
        attrs = mesh.colors * inv_w[:, None]
        covered = np.zeros((fb.height, fb.width), dtype=bool)
        raster_triangles(xy, tris, attrs, fb.depth, fb.color, covered, vert_inv_w=inv_w)
    else:
        covered = np.zeros((fb.height, fb.width), dtype=bool)
        raster_triangles(xy, tris, mesh.colors, fb.depth, fb.color, covered, vert_depth=depth)


def splat_surfels(cloud, prefix: int, size: float, camera: CameraModel,
                  fb: FrameBuffer, radius: float, node_transform=None) -> None:
    """Draw the first `prefix` surfels as screen-aligned squares whose fragments
    are kept only within the oriented disc of the given object-space radius.
    Depth is constant per splat (the surfel center's view depth)."""
    prefix = min(prefix, cloud.count)
    if prefix <= 0 or size < 1.0 or radius <= 0.0:
        return
    transform = np.eye(4) if node_transform is None else np.asarray(node_transform, dtype=np.float64)
    inv = np.linalg.inv(transform)

    local_pos = cloud.positions[:prefix].astype(np.float64)
    local_nrm = cloud.normals[:prefix].astype(np.float64)
    colors = cloud.colors_float()[:prefix]
    world_pos = transform_points(transform, local_pos)

    xy, depth = camera.project(world_pos)
    visible = depth > camera.near
    if not visible.any():
        return
    idx_all = np.nonzero(visible)[0]
    xy = xy[idx_all]
    depth = depth[idx_all]
    n = len(idx_all)

    half = size * 0.5
    k = int(math.ceil(size)) + 1
    off = np.arange(k) - (k - 1) / 2.0
    fx = np.floor(xy[:, 0:1] + off[None, :]).astype(np.int64)
    fy = np.floor(xy[:, 1:2] + off[None, :]).astype(np.int64)
    gx = np.repeat(fx[:, None, :], k, axis=1).reshape(n, k * k)
    gy = np.repeat(fy[:, :, None], k, axis=2).reshape(n, k * k)
    cx_dist = np.abs(gx + 0.5 - xy[:, 0:1])
    cy_dist = np.abs(gy + 0.5 - xy[:, 1:2])
    valid = ((gx >= 0) & (gx < fb.width) & (gy >= 0) & (gy < fb.height)
             & (cx_dist <= half) & (cy_dist <= half))

    # fragment view rays in world space
    w, h = camera.viewport
    if camera.is_perspective:
        tan_y = math.tan(camera.fov_y * 0.5)
        x_ndc = ((gx + 0.5) / w - 0.5) * 2.0
        y_ndc = (0.5 - (gy + 0.5) / h) * 2.0
        dir_cam = np.stack([x_ndc * tan_y * camera.aspect, y_ndc * tan_y,
                            -np.ones_like(x_ndc)], axis=-1)
        ray_dir = dir_cam @ camera.rotation.T
        ray_origin = np.broadcast_to(camera.position, ray_dir.shape)
    else:
        half_h = camera.ortho_height * 0.5
        x_w = ((gx + 0.5) / w - 0.5) * 2.0 * half_h * camera.aspect
        y_w = (0.5 - (gy + 0.5) / h) * 2.0 * half_h
        ray_origin = (camera.position[None, None, :]
                      + x_w[..., None] * camera.right[None, None, :]
                      + y_w[..., None] * camera.up[None, None, :])
        ray_dir = np.broadcast_to(camera.view_dir, ray_origin.shape)

    # intersect with each surfel's tangent plane, measure planar distance in
    # the node's local frame (where the selection radius lives)
    centers = world_pos[idx_all][:, None, :]
    normals_world = transform_directions(transform, local_nrm[idx_all])[:, None, :]
    denom = np.einsum("nfj,nfj->nf", np.broadcast_to(normals_world, ray_dir.shape), ray_dir)
    ok = np.abs(denom) > 1e-12
    t = np.einsum("nfj,nfj->nf", np.broadcast_to(normals_world, ray_dir.shape),
                  centers - ray_origin) / np.where(ok, denom, 1.0)
    hit = ray_origin + t[..., None] * ray_dir
    delta_local = (hit - centers) @ inv[:3, :3].T
    planar = np.linalg.norm(delta_local, axis=-1)
    valid &= ok & (t > 0.0) & (planar <= radius)
    if not valid.any():
        return

    sel = valid.reshape(-1)
    flat_pix = (gy.reshape(-1)[sel] * fb.width + gx.reshape(-1)[sel])
    surf_local = np.repeat(np.arange(n), k * k)[sel]
    frag_depth = depth[surf_local]
    surf_orig = idx_all[surf_local]  # prefix index: lower wins depth ties

    order = np.lexsort((surf_orig, frag_depth, flat_pix))
    pix_sorted = flat_pix[order]
    first = np.ones(len(pix_sorted), dtype=bool)
    first[1:] = pix_sorted[1:] != pix_sorted[:-1]
    win_pix = pix_sorted[first]
    win_depth = frag_depth[order][first]
    win_surf = surf_orig[order][first]

    depth_flat = fb.depth.reshape(-1)
    closer = win_depth < depth_flat[win_pix]
    win_pix = win_pix[closer]
    if not len(win_pix):
        return
    depth_flat[win_pix] = win_depth[closer]
    fb.color.reshape(-1, 4)[win_pix] = colors[win_surf[closer]]


def render_frame(actions: list, camera: CameraModel, fb: FrameBuffer | None = None) -> FrameBuffer:
    """Depth-tested composition of Geometry and SurfelPrefix actions."""
    if fb is None:
        fb = FrameBuffer.create(*camera.viewport)
    for node, action in actions:
        if isinstance(action, Geometry):
            render_node_geometry(node, camera, fb)
        elif isinstance(action, SurfelPrefix):
            if node.lod is not None:
                splat_surfels(node.lod, action.count, action.size, camera, fb,
                              action.radius, node_transform=node.transform)
    return fb


def geometry_actions(scene: SceneNode) -> list:
    """Full-geometry action list (the no-LOD ground truth)."""
    return [(n, Geometry()) for n in scene.walk()
            if n.mesh is not None and n.mesh.triangle_count]

"""Deterministic CPU rasterization: orthographic G-buffer capture and the
triangle fill core shared with the headless renderer."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import AABB, normalized_rows
from .scene import SceneNode, gather_local_geometry

POSITION_TOLERANCE = 1e-4  # covered positions must stay inside bounds + this


@dataclass
class GBuffer:
    width: int
    height: int
    covered: np.ndarray   # (H, W) bool
    position: np.ndarray  # (H, W, 3) float64, node-local
    normal: np.ndarray    # (H, W, 3) float64, node-local unit
    color: np.ndarray     # (H, W, 4) float64 in [0, 1]
    depth: np.ndarray     # (H, W) float64, view units

    @staticmethod
    def blank(width: int, height: int) -> "GBuffer":
        return GBuffer(
            width, height,
            covered=np.zeros((height, width), dtype=bool),
            position=np.zeros((height, width, 3)),
            normal=np.zeros((height, width, 3)),
            color=np.zeros((height, width, 4)),
            depth=np.full((height, width), np.inf),
        )

    @property
    def covered_count(self) -> int:
        return int(self.covered.sum())


@dataclass
class CaptureConfig:
    resolution: int = 1024
    directions: np.ndarray | None = None  # (D, 3); None = from bounding-box corners to center
    cull_backfaces: bool = True

    def __post_init__(self):
        if self.resolution < 1:
            raise ValueError("resolution must be >= 1")
        if self.directions is not None:
            self.directions = normalized_rows(np.asarray(self.directions, dtype=np.float64).reshape(-1, 3))
            if len(self.directions) < 1:
                raise ValueError("need at least one capture direction")


@dataclass
class GBufferSet:
    buffers: list[GBuffer] = field(default_factory=list)
    directions: np.ndarray | None = None
    resolution: int = 0


def view_basis(direction: np.ndarray):
    """Right-handed orthonormal (right, down, forward) frame for a view direction."""
    forward = np.asarray(direction, dtype=np.float64)
    forward = forward / np.linalg.norm(forward)
    ref = np.array([0.0, 1.0, 0.0]) if abs(forward[1]) < 0.9 else np.array([1.0, 0.0, 0.0])
    right = np.cross(ref, forward)
    right /= np.linalg.norm(right)
    down = np.cross(forward, right)
    return right, down, forward


def default_directions(bounds: AABB) -> np.ndarray:
    """Unit view directions from the eight box corners toward the box center."""
    center = bounds.center
    corners = bounds.corners()
    dirs = center - corners
    lengths = np.linalg.norm(dirs, axis=1)
    if np.any(lengths < 1e-12):  # degenerate box: fall back to the cube diagonals
        dirs = -np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)], dtype=np.float64)
    return normalized_rows(dirs)


def _topleft_mask(a, b):
    dy = b[1] - a[1]
    dx = b[0] - a[0]
    return (dy == 0.0 and dx > 0.0) or dy < 0.0


def raster_triangles(xy, tris, vert_attrs, depth_buf, attr_buf, covered,
                     vert_depth=None, vert_inv_w=None):
    """Fill triangles into depth/attribute buffers (top-left rule, depth test).

    xy: (V, 2) screen coords, pixel centers at integer+0.5; y grows downward.
    vert_attrs: (V, K) per-vertex attributes. With vert_inv_w given, attributes
    must be pre-multiplied by 1/w and depth is derived as 1/lerp(1/w)
    (perspective-correct); otherwise vert_depth is interpolated linearly.
    Smaller depth wins; ties keep the earlier write.
    """
    height, width = depth_buf.shape
    for t in range(len(tris)):
        i0, i1, i2 = tris[t]
        p0, p1, p2 = xy[i0], xy[i1], xy[i2]
        area = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0])
        if area == 0.0:
            continue
        if area < 0.0:
            i1, i2 = i2, i1
            p1, p2 = p2, p1
            area = -area

        xmin = min(p0[0], p1[0], p2[0])
        xmax = max(p0[0], p1[0], p2[0])
        ymin = min(p0[1], p1[1], p2[1])
        ymax = max(p0[1], p1[1], p2[1])
        ix0 = max(int(np.ceil(xmin - 0.5)), 0)
        ix1 = min(int(np.floor(xmax - 0.5)), width - 1)
        iy0 = max(int(np.ceil(ymin - 0.5)), 0)
        iy1 = min(int(np.floor(ymax - 0.5)), height - 1)
        if ix0 > ix1 or iy0 > iy1:
            continue

        px = np.arange(ix0, ix1 + 1) + 0.5
        py = (np.arange(iy0, iy1 + 1) + 0.5)[:, None]
        # edge functions: positive inside for the normalized winding
        w0 = (p2[0] - p1[0]) * (py - p1[1]) - (p2[1] - p1[1]) * (px - p1[0])
        w1 = (p0[0] - p2[0]) * (py - p2[1]) - (p0[1] - p2[1]) * (px - p2[0])
        w2 = (p1[0] - p0[0]) * (py - p0[1]) - (p1[1] - p0[1]) * (px - p0[0])
        inside = (
            ((w0 > 0.0) | ((w0 == 0.0) & _topleft_mask(p1, p2)))
            & ((w1 > 0.0) | ((w1 == 0.0) & _topleft_mask(p2, p0)))
            & ((w2 > 0.0) | ((w2 == 0.0) & _topleft_mask(p0, p1)))
        )
        if not inside.any():
            continue

        b0 = w0 / area
        b1 = w1 / area
        b2 = w2 / area
        if vert_inv_w is not None:
            inv_w = b0 * vert_inv_w[i0] + b1 * vert_inv_w[i1] + b2 * vert_inv_w[i2]
            depth = np.where(inv_w > 0.0, 1.0 / np.where(inv_w > 0.0, inv_w, 1.0), np.inf)
        else:
            depth = b0 * vert_depth[i0] + b1 * vert_depth[i1] + b2 * vert_depth[i2]

        win_depth = depth_buf[iy0:iy1 + 1, ix0:ix1 + 1]
        write = inside & (depth < win_depth)
        if not write.any():
            continue
        attrs = (b0[..., None] * vert_attrs[i0]
                 + b1[..., None] * vert_attrs[i1]
                 + b2[..., None] * vert_attrs[i2])
        if vert_inv_w is not None:
            attrs = attrs / np.where(inv_w[..., None] > 0.0, inv_w[..., None], 1.0)
        win_depth[write] = depth[write]
        attr_buf[iy0:iy1 + 1, ix0:ix1 + 1][write] = attrs[write]
        covered[iy0:iy1 + 1, ix0:ix1 + 1][write] = True


def _local_bounds(meshes, clouds) -> AABB:
    box = AABB.empty()
    for pos, _, _, _ in meshes:
        box = box.union(AABB.from_points(pos))
    for pos, _, _, radius in clouds:
        box = box.union(AABB.from_points(pos).expanded(radius))
    return box


def rasterize_direction(node: SceneNode, direction, config: CaptureConfig,
                        use_child_lods: bool = False) -> GBuffer:
    """Orthographic G-buffer of the node's subtree along a view direction.

    The projection rectangle is fitted to the subtree bounds along the view,
    expanded to a square so pixels stay square.
    """
    res = config.resolution
    gbuf = GBuffer.blank(res, res)
    meshes, clouds = gather_local_geometry(node, use_child_lods=use_child_lods)
    if not meshes and not clouds:
        return gbuf

    right, down, forward = view_basis(direction)
    bounds = _local_bounds(meshes, clouds)
    corners = bounds.corners()
    u = corners @ right
    v = corners @ down
    side = max(u.max() - u.min(), v.max() - v.min(), 1e-12)
    u0 = (u.min() + u.max() - side) * 0.5
    v0 = (v.min() + v.max() - side) * 0.5
    pixel = side / res

    attr_buf = np.zeros((res, res, 10))  # position 3, normal 3, color 4

    for pos, nrm, col, tris in meshes:
        if config.cull_backfaces and len(tris):
            face_n = nrm[tris[:, 0]] + nrm[tris[:, 1]] + nrm[tris[:, 2]]
            tris = tris[face_n @ forward < 0.0]
        if not len(tris):
            continue
        sx = (pos @ right - u0) / pixel
        sy = (pos @ down - v0) / pixel
        xy = np.stack([sx, sy], axis=1)
        depth = pos @ forward
        attrs = np.concatenate([pos, nrm, col], axis=1)
        raster_triangles(xy, tris, attrs, gbuf.depth, attr_buf, gbuf.covered, vert_depth=depth)

    for pos, nrm, col, radius in clouds:
        keep = np.ones(len(pos), dtype=bool)
        if config.cull_backfaces:
            keep = nrm @ forward < 0.0
        _splat_discs_ortho(gbuf, attr_buf, pos[keep], nrm[keep], col[keep], radius,
                           right, down, forward, u0, v0, pixel)

    if gbuf.covered.any():
        gbuf.position = attr_buf[..., 0:3]
        raw_n = attr_buf[..., 3:6]
        lengths = np.linalg.norm(raw_n, axis=-1, keepdims=True)
        gbuf.normal = np.where(lengths > 1e-12, raw_n / np.where(lengths > 0, lengths, 1.0), raw_n)
        gbuf.color = np.clip(attr_buf[..., 6:10], 0.0, 1.0)
    return gbuf


def _splat_discs_ortho(gbuf, attr_buf, pos, nrm, col, radius,
                       right, down, forward, u0, v0, pixel):
    """Draw oriented discs into an orthographic G-buffer (bottom-up capture)."""
    n = len(pos)
    if n == 0 or radius <= 0.0:
        return
    res = gbuf.width
    r_px = radius / pixel
    k = int(np.ceil(2.0 * r_px)) + 2
    cx = (pos @ right - u0) / pixel
    cy = (pos @ down - v0) / pixel

    off = np.arange(k) - (k - 1) / 2.0
    # fragment pixel indices per surfel, snapped around the projected center
    fx = np.floor(cx[:, None] + off[None, :]).astype(np.int64)
    fy = np.floor(cy[:, None] + off[None, :]).astype(np.int64)
    gx = np.repeat(fx[:, None, :], k, axis=1)
    gy = np.repeat(fy[:, :, None], k, axis=2)
    gx = gx.reshape(n, k * k)
    gy = gy.reshape(n, k * k)
    valid = (gx >= 0) & (gx < res) & (gy >= 0) & (gy < res)

    # orthographic ray through each fragment's pixel center, intersected with
    # the surfel plane
    pu = (gx + 0.5) * pixel + u0
    pv = (gy + 0.5) * pixel + v0
    origin = pu[..., None] * right + pv[..., None] * down  # point on w=0 plane
    denom = nrm @ forward
    ok = np.abs(denom) > 1e-12
    t = np.einsum("nj,nfj->nf", nrm, pos[:, None, :] - origin) / np.where(ok, denom, 1.0)[:, None]
    hit = origin + t[..., None] * forward[None, None, :]
    planar = np.linalg.norm(hit - pos[:, None, :], axis=-1)
    valid &= ok[:, None] & (planar <= radius)
    if not valid.any():
        return

    depth = t  # distance along forward from the w=0 plane
    sel = valid.reshape(-1)
    flat_idx = (gy.reshape(-1)[sel] * res + gx.reshape(-1)[sel])
    frag_depth = depth.reshape(-1)[sel]
    surfel_of = np.repeat(np.arange(n), k * k)[sel]

    order = np.lexsort((surfel_of, frag_depth, flat_idx))
    flat_sorted = flat_idx[order]
    first = np.ones(len(flat_sorted), dtype=bool)
    first[1:] = flat_sorted[1:] != flat_sorted[:-1]
    win_pix = flat_sorted[first]
    win_depth = frag_depth[order][first]
    win_surf = surfel_of[order][first]

    depth_flat = gbuf.depth.reshape(-1)
    closer = win_depth < depth_flat[win_pix]
    win_pix = win_pix[closer]
    if not len(win_pix):
        return
    win_depth = win_depth[closer]
    win_surf = win_surf[closer]
    depth_flat[win_pix] = win_depth
    gbuf.covered.reshape(-1)[win_pix] = True
    attrs = attr_buf.reshape(-1, 10)
    attrs[win_pix, 0:3] = pos[win_surf]
    attrs[win_pix, 3:6] = nrm[win_surf]
    attrs[win_pix, 6:10] = col[win_surf]


def capture_gbuffers(node: SceneNode, config: CaptureConfig | None = None,
                     use_child_lods: bool = False) -> GBufferSet:
    """One orthographic G-buffer per configured direction; deterministic."""
    if config is None:
        config = CaptureConfig()
    if config.directions is not None:
        directions = config.directions
    else:
        meshes, clouds = gather_local_geometry(node, use_child_lods=use_child_lods)
        directions = default_directions(_local_bounds(meshes, clouds))
    buffers = [rasterize_direction(node, d, config, use_child_lods=use_child_lods)
               for d in directions]
    return GBufferSet(buffers=buffers, directions=directions, resolution=config.resolution)


def gbuffer_channel_image(gbuf: GBuffer, channel: str) -> np.ndarray:
    """(H, W, 3) uint8 visualization of one G-buffer channel for debug dumps."""
    if channel == "color":
        img = gbuf.color[..., :3]
    elif channel == "normal":
        img = gbuf.normal * 0.5 + 0.5
    elif channel == "position":
        lo = gbuf.position.min(axis=(0, 1))
        hi = gbuf.position.max(axis=(0, 1))
        span = np.where(hi - lo > 1e-12, hi - lo, 1.0)
        img = (gbuf.position - lo) / span
    elif channel == "depth":
        d = np.where(np.isfinite(gbuf.depth), gbuf.depth, np.nan)
        lo, hi = np.nanmin(d) if gbuf.covered.any() else 0.0, np.nanmax(d) if gbuf.covered.any() else 1.0
        span = hi - lo if hi > lo else 1.0
        img = np.repeat(((d - lo) / span)[..., None], 3, axis=-1)
        img = np.where(np.isnan(img), 0.0, img)
    elif channel == "coverage":
        img = np.repeat(gbuf.covered[..., None].astype(np.float64), 3, axis=-1)
    else:
        raise ValueError(f"unknown channel: {channel}")
    img = np.where(gbuf.covered[..., None], img, 0.0)
    return np.clip(np.round(img * 255.0), 0, 255).astype(np.uint8)

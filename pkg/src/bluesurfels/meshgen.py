"""Seeded procedural meshes and scenes used by tests and benchmarks."""

from __future__ import annotations

import numpy as np

from .geometry import normalized_rows, translation
from .scene import SceneNode, TriangleMesh, build_spatial_structure, update_node_caches


def quad_mesh(size: float = 1.0, z: float = 0.0, color=(0.8, 0.2, 0.2, 1.0)) -> TriangleMesh:
    """Unit quad in the xy plane, normal +z."""
    h = size * 0.5
    positions = np.array([[-h, -h, z], [h, -h, z], [h, h, z], [-h, h, z]])
    normals = np.tile([0.0, 0.0, 1.0], (4, 1))
    colors = np.tile(color, (4, 1))
    triangles = np.array([[0, 1, 2], [0, 2, 3]])
    return TriangleMesh(positions, normals, colors, triangles)


def box_mesh(size=1.0, color=(0.7, 0.7, 0.7, 1.0)) -> TriangleMesh:
    """Axis-aligned box centered at the origin with per-face normals."""
    sx, sy, sz = np.broadcast_to(size, 3) * 0.5
    faces = [
        ((+1, 0, 0), [( sx, -sy, -sz), ( sx,  sy, -sz), ( sx,  sy,  sz), ( sx, -sy,  sz)]),
        ((-1, 0, 0), [(-sx, -sy, -sz), (-sx, -sy,  sz), (-sx,  sy,  sz), (-sx,  sy, -sz)]),
        ((0, +1, 0), [(-sx,  sy, -sz), (-sx,  sy,  sz), ( sx,  sy,  sz), ( sx,  sy, -sz)]),
        ((0, -1, 0), [(-sx, -sy, -sz), ( sx, -sy, -sz), ( sx, -sy,  sz), (-sx, -sy,  sz)]),
        ((0, 0, +1), [(-sx, -sy,  sz), ( sx, -sy,  sz), ( sx,  sy,  sz), (-sx,  sy,  sz)]),
        ((0, 0, -1), [(-sx, -sy, -sz), (-sx,  sy, -sz), ( sx,  sy, -sz), ( sx, -sy, -sz)]),
    ]
    positions, normals, triangles = [], [], []
    for normal, corners in faces:
        base = len(positions)
        positions.extend(corners)
        normals.extend([normal] * 4)
        triangles.append((base, base + 1, base + 2))
        triangles.append((base, base + 2, base + 3))
    colors = np.tile(color, (len(positions), 1))
    return TriangleMesh(np.array(positions, dtype=np.float64), np.array(normals, dtype=np.float64),
                        colors, np.array(triangles))


def uv_sphere(rings: int = 32, segments: int = 32, radius: float = 0.5,
              bump: float = 0.0, seed: int = 0) -> TriangleMesh:
    """UV sphere; optional seeded radial displacement for irregular surfaces.

    Triangle count is 2 * segments * (rings - 1).
    """
    rng = np.random.default_rng(seed)
    theta = np.linspace(0.0, np.pi, rings + 1)
    phi = np.linspace(0.0, 2.0 * np.pi, segments, endpoint=False)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    x = np.sin(tt) * np.cos(pp)
    y = np.cos(tt)
    z = np.sin(tt) * np.sin(pp)
    unit = np.stack([x, y, z], axis=-1).reshape(-1, 3)

    r = np.full(len(unit), radius)
    if bump > 0.0:
        # smooth displacement from a few random spherical harmonics-ish waves
        waves = rng.uniform(-1.0, 1.0, size=(4, 3))
        freq = rng.integers(2, 6, size=4)
        for w, f in zip(waves, freq):
            r += bump * radius * np.sin(unit @ w * f)
    positions = unit * r[:, None]

    cols = segments
    triangles = []
    for i in range(rings):
        for j in range(segments):
            a = i * cols + j
            b = i * cols + (j + 1) % cols
            c = (i + 1) * cols + j
            d = (i + 1) * cols + (j + 1) % cols
            if i > 0:
                triangles.append((a, b, c))
            if i < rings - 1:
                triangles.append((b, d, c))
    triangles = np.array(triangles, dtype=np.int32)

    colors = np.empty((len(positions), 4))
    colors[:, :3] = 0.5 + 0.45 * np.sin(positions / radius * np.array([3.0, 5.0, 7.0]))
    colors[:, 3] = 1.0
    return TriangleMesh(positions, None, np.clip(colors, 0.0, 1.0), triangles)


def nested_boxes(outer: float = 1.0, inner: float = 0.5) -> SceneNode:
    """Outer box fully occluding an inner box; colors differ per box."""
    outer_node = SceneNode(id="outer", mesh=box_mesh(outer, color=(0.9, 0.1, 0.1, 1.0)))
    inner_node = SceneNode(id="inner", mesh=box_mesh(inner, color=(0.1, 0.9, 0.1, 1.0)))
    root = SceneNode(id="nested", children=[outer_node, inner_node])
    return update_node_caches(root)


def instanced_grid_scene(nx: int = 4, nz: int = 4, spacing: float = 2.0,
                         rings: int = 24, segments: int = 24, seed: int = 7) -> SceneNode:
    """Grid of translated instances sharing one sphere mesh."""
    mesh = uv_sphere(rings=rings, segments=segments, bump=0.1, seed=seed)
    nodes = []
    for i in range(nx):
        for k in range(nz):
            nodes.append(SceneNode(
                id=f"inst_{i}_{k}",
                transform=translation([i * spacing, 0.0, k * spacing]),
                mesh=mesh,
            ))
    return update_node_caches(build_spatial_structure(nodes))


def random_candidates(n: int, seed: int = 0):
    """Synthetic candidate set: uniform points in the unit cube."""
    from .sampling import CandidateSet
    rng = np.random.default_rng(seed)
    pos = rng.random((n, 3)).astype(np.float32)
    nrm = normalized_rows(rng.normal(size=(n, 3))).astype(np.float32)
    col = rng.integers(0, 256, size=(n, 4), dtype=np.int64).astype(np.uint8)
    return CandidateSet(pos, nrm, col)

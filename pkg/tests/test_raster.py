import numpy as np
import pytest

from bluesurfels.meshgen import box_mesh, nested_boxes, quad_mesh, uv_sphere
from bluesurfels.raster import (
    CaptureConfig,
    capture_gbuffers,
    default_directions,
    rasterize_direction,
    view_basis,
)
from bluesurfels.scene import SceneNode, TriangleMesh, update_node_caches


def _node(mesh, node_id="n"):
    return update_node_caches(SceneNode(id=node_id, mesh=mesh))


def test_quad_facing_view_has_constant_normal():
    node = _node(quad_mesh())  # normal +z
    gbuf = rasterize_direction(node, (0.0, 0.0, -1.0), CaptureConfig(resolution=64))
    assert gbuf.covered_count > 0
    normals = gbuf.normal[gbuf.covered]
    np.testing.assert_allclose(normals, np.tile([0.0, 0.0, 1.0], (len(normals), 1)), atol=1e-12)


def test_cube_face_fills_view_exactly():
    # the view rectangle is fitted to the bounds, so the facing unit-cube face
    # covers every pixel: 64 * 64
    node = _node(box_mesh(1.0))
    gbuf = rasterize_direction(node, (0.0, 0.0, -1.0), CaptureConfig(resolution=64))
    assert gbuf.covered_count == 64 * 64


def test_covered_positions_inside_bounds():
    node = _node(box_mesh(1.0))
    direction = np.array([1.0, 1.0, 1.0]) / np.sqrt(3.0)
    gbuf = rasterize_direction(node, direction, CaptureConfig(resolution=64))
    assert gbuf.covered_count > 0
    pos = gbuf.position[gbuf.covered]
    assert np.all(pos >= -0.5 - 1e-4)
    assert np.all(pos <= 0.5 + 1e-4)


def test_backface_culling_leaves_buffer_uncovered():
    node = _node(quad_mesh())  # normal +z
    # viewing along +z sees only the back side
    gbuf = rasterize_direction(node, (0.0, 0.0, 1.0), CaptureConfig(resolution=32))
    assert gbuf.covered_count == 0
    # with culling off the back side rasterizes
    gbuf = rasterize_direction(node, (0.0, 0.0, 1.0),
                               CaptureConfig(resolution=32, cull_backfaces=False))
    assert gbuf.covered_count > 0


def test_nested_cubes_inner_never_visible():
    scene = nested_boxes()  # outer red, inner green
    buffers = capture_gbuffers(scene, CaptureConfig(resolution=64))
    assert len(buffers.buffers) == 8
    for gbuf in buffers.buffers:
        assert gbuf.covered_count > 0
        colors = gbuf.color[gbuf.covered]
        # every covered pixel is the outer box's red, never the inner green
        assert np.all(colors[:, 0] > 0.5)
        assert np.all(colors[:, 1] < 0.5)


def test_sphere_covered_from_all_default_directions():
    node = _node(uv_sphere(rings=12, segments=12))
    buffers = capture_gbuffers(node, CaptureConfig(resolution=32))
    for gbuf in buffers.buffers:
        assert gbuf.covered_count > 0


def test_empty_node_all_uncovered():
    node = SceneNode(id="empty")
    gbuf = rasterize_direction(node, (0.0, 0.0, -1.0), CaptureConfig(resolution=16))
    assert gbuf.covered_count == 0


def test_capture_deterministic():
    node = _node(uv_sphere(rings=10, segments=10, bump=0.1, seed=3))
    a = capture_gbuffers(node, CaptureConfig(resolution=48))
    b = capture_gbuffers(node, CaptureConfig(resolution=48))
    for ga, gb in zip(a.buffers, b.buffers):
        assert np.array_equal(ga.covered, gb.covered)
        assert np.array_equal(ga.depth, gb.depth)
        assert np.array_equal(ga.position, gb.position)
        assert np.array_equal(ga.normal, gb.normal)
        assert np.array_equal(ga.color, gb.color)


def test_default_directions_point_inward():
    from bluesurfels.geometry import AABB
    box = AABB(np.zeros(3), np.ones(3))
    dirs = default_directions(box)
    assert dirs.shape == (8, 3)
    np.testing.assert_allclose(np.linalg.norm(dirs, axis=1), 1.0)
    # each direction goes from a corner toward the center
    for corner, d in zip(box.corners(), dirs):
        expect = box.center - corner
        expect /= np.linalg.norm(expect)
        np.testing.assert_allclose(d, expect, atol=1e-12)


# ---------------------------------------------------------------------------
# ray-casting depth oracle

def _ray_cast_depths(node, direction, res):
    """Minimum ray-triangle hit depth per pixel, same view fitting as the
    rasterizer (orthographic rays through pixel centers)."""
    mesh = node.mesh
    right, down, forward = view_basis(direction)
    corners = mesh.bounds().corners()
    u = corners @ right
    v = corners @ down
    side = max(u.max() - u.min(), v.max() - v.min())
    u0 = (u.min() + u.max() - side) * 0.5
    v0 = (v.min() + v.max() - side) * 0.5
    pixel = side / res

    ix = np.arange(res)
    pu = (ix + 0.5) * pixel + u0
    pv = (ix + 0.5) * pixel + v0
    origins = (pu[None, :, None] * right + pv[:, None, None] * down).reshape(-1, 3)

    depths = np.full(res * res, np.inf)
    a = mesh.positions[mesh.triangles[:, 0]]
    b = mesh.positions[mesh.triangles[:, 1]]
    c = mesh.positions[mesh.triangles[:, 2]]
    for ta, tb, tc in zip(a, b, c):
        e1, e2 = tb - ta, tc - ta
        pvec = np.cross(forward, e2)
        det = e1 @ pvec
        if abs(det) < 1e-12:
            continue
        tvec = origins - ta
        bu = (tvec @ pvec) / det
        qvec = np.cross(tvec, np.broadcast_to(e1, tvec.shape))
        bv = (qvec @ forward) / det
        t = (qvec @ e2) / det
        hit = (bu >= 0.0) & (bv >= 0.0) & (bu + bv <= 1.0)
        depths[hit] = np.minimum(depths[hit], t[hit])
    return depths.reshape(res, res)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_depth_matches_ray_cast_oracle(seed):
    rng = np.random.default_rng(seed)
    n_tris = 20
    positions = rng.uniform(-1.0, 1.0, (n_tris * 3, 3))
    triangles = np.arange(n_tris * 3).reshape(-1, 3)
    mesh = TriangleMesh(positions, None, None, triangles)
    node = _node(mesh)
    direction = np.array([0.3, -0.5, -1.0])
    direction /= np.linalg.norm(direction)

    res = 64
    gbuf = rasterize_direction(node, direction, CaptureConfig(resolution=res,
                                                              cull_backfaces=False))
    oracle = _ray_cast_depths(node, direction, res)

    covered = gbuf.covered
    assert covered.any()
    # every covered pixel's depth equals the nearest ray-cast hit
    diff = np.abs(gbuf.depth[covered] - oracle[covered])
    assert np.all(np.isfinite(oracle[covered]))
    assert diff.max() < 1e-3

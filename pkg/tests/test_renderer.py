import math

import numpy as np
import pytest

from bluesurfels.meshgen import box_mesh, nested_boxes, quad_mesh
from bluesurfels.prefixmath import CameraModel, Geometry, SurfelPrefix
from bluesurfels.raster import CaptureConfig, rasterize_direction
from bluesurfels.renderer import FrameBuffer, geometry_actions, render_frame, splat_surfels
from bluesurfels.sampling import make_cloud
from bluesurfels.scene import SceneNode, update_node_caches


def _cloud(points, normals, colors=None):
    pos = np.asarray(points, dtype=np.float32).reshape(-1, 3)
    nrm = np.asarray(normals, dtype=np.float32).reshape(-1, 3)
    if colors is None:
        colors = np.full((len(pos), 4), 255, dtype=np.uint8)
    return make_cloud(pos, nrm, np.asarray(colors, dtype=np.uint8))


def _front_ortho(viewport=64, height=2.0):
    return CameraModel.look_at((0, 0, 5), (0, 0, 0), viewport=(viewport, viewport),
                               fov_y=None, ortho_height=height)


def test_empty_actions_cleared_buffer():
    camera = _front_ortho()
    fb = render_frame([], camera)
    assert np.all(fb.depth == np.inf)
    np.testing.assert_array_equal(fb.rgb(), np.zeros((64, 64, 3)))


def test_facing_surfel_paints_filled_disc():
    camera = _front_ortho(viewport=64, height=2.0)
    pixel = 2.0 / 64  # world units per pixel
    size = 8.0
    radius = (size / 2.0) * pixel
    cloud = _cloud([[0, 0, 0]], [[0, 0, 1]])
    fb = FrameBuffer.create(64, 64)
    splat_surfels(cloud, 1, size, camera, fb, radius)
    painted = np.nonzero(fb.depth < np.inf)
    assert len(painted[0]) > 0
    ys, xs = painted
    # all painted pixels within the s x s square around the projected center
    assert xs.min() >= 32 - 5 and xs.max() <= 32 + 4
    assert ys.min() >= 32 - 5 and ys.max() <= 32 + 4
    # roughly a disc: more than half the bounding square's circle area
    assert len(xs) >= 0.5 * math.pi / 4.0 * size * size
    assert len(xs) <= size * size


def test_edge_on_surfel_paints_almost_nothing():
    camera = _front_ortho()
    cloud = _cloud([[0, 0, 0]], [[1, 0, 0]])
    fb = FrameBuffer.create(64, 64)
    splat_surfels(cloud, 1, 8.0, camera, fb, 0.25)
    assert int((fb.depth < np.inf).sum()) <= 8  # degenerate sliver


def test_nearer_surfel_wins_overlap():
    camera = _front_ortho()
    colors = np.array([[255, 0, 0, 255], [0, 255, 0, 255]], dtype=np.uint8)
    # the green surfel sits nearer to the camera (+z side)
    cloud = _cloud([[0, 0, 0], [0, 0, 0.5]], [[0, 0, 1], [0, 0, 1]], colors)
    fb = FrameBuffer.create(64, 64)
    splat_surfels(cloud, 2, 8.0, camera, fb, 0.2)
    painted = fb.color[fb.depth < np.inf]
    center = fb.color[32, 32]
    np.testing.assert_array_equal(center[:3], [0.0, 1.0, 0.0])


def test_opacity_every_pixel_is_one_surfel_color():
    rng = np.random.default_rng(8)
    n = 50
    pos = rng.uniform(-0.8, 0.8, (n, 3)).astype(np.float32)
    nrm = np.tile(np.float32([0, 0, 1]), (n, 1))
    colors = rng.integers(0, 256, (n, 4), dtype=np.int64).astype(np.uint8)
    colors[:, 3] = 255
    cloud = _cloud(pos, nrm, colors)
    camera = _front_ortho(viewport=96)
    fb = FrameBuffer.create(96, 96)
    splat_surfels(cloud, n, 6.0, camera, fb, 0.1)
    painted = fb.color[fb.depth < np.inf]
    assert len(painted) > 0
    palette = {tuple(c) for c in cloud.colors_float()}
    for c in painted:
        assert tuple(c) in palette  # no blending, exact stored colors


def test_prefix_clamps_to_cloud_size():
    camera = _front_ortho()
    cloud = _cloud([[0, 0, 0]], [[0, 0, 1]])
    fb = FrameBuffer.create(64, 64)
    splat_surfels(cloud, 100, 4.0, camera, fb, 0.1)  # prefix beyond count
    assert (fb.depth < np.inf).any()


def test_subpixel_size_draws_nothing():
    camera = _front_ortho()
    cloud = _cloud([[0, 0, 0]], [[0, 0, 1]])
    fb = FrameBuffer.create(64, 64)
    splat_surfels(cloud, 1, 0.5, camera, fb, 0.1)
    assert not (fb.depth < np.inf).any()


def test_quad_geometry_matches_capture_rasterizer():
    # same fill core: an exactly view-filling quad covers every pixel in both
    node = update_node_caches(SceneNode(id="q", mesh=quad_mesh(color=(0.2, 0.6, 0.9, 1.0))))
    gbuf = rasterize_direction(node, (0.0, 0.0, -1.0), CaptureConfig(resolution=32))
    camera = CameraModel.look_at((0, 0, 1), (0, 0, 0), viewport=(32, 32),
                                 fov_y=None, ortho_height=1.0)
    fb = render_frame([(node, Geometry())], camera)
    assert gbuf.covered.all()
    assert (fb.depth < np.inf).all()
    np.testing.assert_allclose(fb.rgb(), gbuf.color[..., :3])


def test_perspective_geometry_occlusion():
    scene = nested_boxes()  # outer red, inner green
    camera = CameraModel.look_at((0, 0, 3), (0, 0, 0), viewport=(64, 64),
                                 fov_y=math.radians(60.0))
    fb = render_frame(geometry_actions(scene), camera)
    painted = fb.rgb()[fb.depth < np.inf]
    assert len(painted) > 0
    assert np.all(painted[:, 0] > 0.5)  # only the outer box's red shows
    assert np.all(painted[:, 1] < 0.5)


def test_geometry_behind_camera_dropped():
    node = update_node_caches(SceneNode(id="b", mesh=box_mesh(1.0)))
    camera = CameraModel.look_at((0, 0, -5), (0, 0, -10), viewport=(32, 32))
    fb = render_frame([(node, Geometry())], camera)
    assert not (fb.depth < np.inf).any()


def test_render_frame_deterministic():
    scene = nested_boxes()
    camera = CameraModel.look_at((2, 1, 3), (0, 0, 0), viewport=(48, 48))
    a = render_frame(geometry_actions(scene), camera)
    b = render_frame(geometry_actions(scene), camera)
    assert np.array_equal(a.color, b.color)
    assert np.array_equal(a.depth, b.depth)

import json

import numpy as np
import pytest

from bluesurfels import bench
from bluesurfels.lodpipe import LodPolicy, generate_lods
from bluesurfels.meshgen import instanced_grid_scene, uv_sphere
from bluesurfels.prefixmath import CameraModel
from bluesurfels.raster import CaptureConfig
from bluesurfels.sampling import SamplingConfig
from bluesurfels.vectors import export_test_vectors, generate_test_vectors


@pytest.fixture(scope="module")
def lod_scene():
    scene = instanced_grid_scene(nx=2, nz=2, rings=16, segments=16, seed=1)
    generate_lods(scene, LodPolicy(min_triangles_for_lod=400, lod_triangle_threshold=400),
                  CaptureConfig(resolution=64), SamplingConfig(target_count=1, seed=0))
    return scene


def test_run_views_report(lod_scene, tmp_path):
    center = lod_scene.bounds.center
    cam = CameraModel.look_at(center + np.array([0, 1.0, 6.0]), center)
    report = bench.run_views(lod_scene, [cam], [64])
    assert len(report.rows) == 2
    truth, lod = report.rows
    assert not truth.lod and lod.lod
    assert truth.surfels == 0
    assert truth.ssim_vs_nolod == 1.0
    assert lod.triangles <= truth.triangles
    assert -1.0 <= lod.ssim_vs_nolod <= 1.0
    path = tmp_path / "views.csv"
    report.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0].startswith("view,resolution,lod")
    assert len(lines) == 3


def test_run_position_grid_count_one(lod_scene):
    report = bench.run_position_grid(lod_scene, lod_scene.bounds, count=1,
                                     height=1.0, t_target=1000.0, resolution=32)
    # one position, four cardinal directions
    assert len(report.grid_times_ms) == 4
    q1, q2, q3 = report.quartiles()
    assert q1 <= q2 <= q3


def test_time_preprocessing_rows(tmp_path):
    mesh = uv_sphere(rings=12, segments=12)
    rows = bench.time_preprocessing(mesh, [50, 200], resolution=48)
    assert [r.surfel_count for r in rows] == [50, 200]
    for r in rows:
        assert r.capture_ms > 0 and r.candidate_ms > 0 and r.sampling_ms > 0
        assert r.total_ms == r.capture_ms + r.candidate_ms + r.sampling_ms
    path = tmp_path / "pre.csv"
    bench.preprocess_to_csv(rows, path)
    assert path.read_text().startswith("surfel_count,capture_ms")


def test_shared_test_vectors_cover_all_formula_groups(tmp_path):
    vectors = generate_test_vectors()
    assert set(vectors) == {"prefix", "radius", "budget", "foveation"}
    assert all(len(v) > 0 for v in vectors.values())
    # prefix vectors include a saturated case and the fixed point
    assert any(c["saturated"] for c in vectors["prefix"])
    fixed = [c for c in vectors["prefix"] if c["r"] == c["r_m"]]
    assert all(c["expected_p"] == c["p_m"] for c in fixed)
    path = tmp_path / "vectors.json"
    export_test_vectors(path)
    assert json.loads(path.read_text()) == vectors

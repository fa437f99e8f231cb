import numpy as np
import pytest

from bluesurfels.meshgen import random_candidates
from bluesurfels.metrics import (
    SSIM_C1,
    compute_r_m,
    min_neighbor_distances,
    nearest_neighbor_distances,
    ssim,
    stats_to_csv,
)
from bluesurfels.sampling import SamplingConfig, make_cloud, sample_progressive


def _cloud_from_points(points):
    pos = np.asarray(points, dtype=np.float32)
    nrm = np.tile(np.float32([0, 0, 1]), (len(pos), 1))
    col = np.full((len(pos), 4), 255, dtype=np.uint8)
    return make_cloud(pos, nrm, col)


def _brute_force_min_distances(points):
    pts = np.asarray(points, dtype=np.float64)
    d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    np.fill_diagonal(d, np.inf)
    return d.min(axis=1)


# ---------------------------------------------------------------------------
# distance stats

def test_unit_square_min_distances():
    cloud = _cloud_from_points([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]])
    stats = min_neighbor_distances(cloud, 4)
    np.testing.assert_allclose(stats.distances, 1.0)
    assert stats.median == 1.0
    assert stats.min == 1.0


def test_close_pair_dominates_min():
    cloud = _cloud_from_points([[0, 0, 0], [0.001, 0, 0], [10, 0, 0], [0, 10, 0]])
    stats = min_neighbor_distances(cloud, 4)
    assert np.isclose(stats.min, 0.001, rtol=1e-3)


def test_prefix_below_two_rejected():
    cloud = _cloud_from_points([[0, 0, 0], [1, 0, 0]])
    with pytest.raises(ValueError):
        min_neighbor_distances(cloud, 1)
    with pytest.raises(ValueError):
        min_neighbor_distances(cloud, 3)


@pytest.mark.parametrize("n", [50, 500, 2000])
def test_matches_brute_force(n):
    cands = random_candidates(n, seed=n)
    cloud = _cloud_from_points(cands.positions)
    stats = min_neighbor_distances(cloud, n)
    oracle = _brute_force_min_distances(cloud.positions)
    np.testing.assert_array_equal(np.sort(stats.distances), np.sort(oracle))


def test_normalized_distances_divide_by_diagonal():
    cloud = _cloud_from_points([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]])
    stats = min_neighbor_distances(cloud, 4, normalized=True)
    np.testing.assert_allclose(stats.distances, 1.0 / cloud.bounds.diagonal)


def test_compute_r_m_grid_spacing():
    h = 0.25
    xs, ys = np.meshgrid(np.arange(8) * h, np.arange(8) * h)
    pts = np.stack([xs.ravel(), ys.ravel(), np.zeros(64)], axis=1)
    cloud = _cloud_from_points(pts)
    assert np.isclose(compute_r_m(cloud), h, rtol=1e-6)


def test_compute_r_m_clamps_prefix():
    cloud = _cloud_from_points([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]])
    r_m = compute_r_m(cloud, p_m=1000)
    assert r_m == 1.0
    assert cloud.r_m == 1.0


def test_compute_r_m_matches_brute_force_median():
    cands = random_candidates(1500, seed=21)
    cloud = sample_progressive(cands, SamplingConfig(target_count=1500, seed=0))
    r_m = compute_r_m(cloud, p_m=1000)
    oracle = float(np.median(_brute_force_min_distances(cloud.positions[:1000])))
    assert r_m == oracle


def test_stats_csv_export(tmp_path):
    cloud = _cloud_from_points([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]])
    path = tmp_path / "stats.csv"
    stats_to_csv([min_neighbor_distances(cloud, 4)], path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "prefix,min,q1,median,q3,max"
    assert lines[1].startswith("4,1.0")


# ---------------------------------------------------------------------------
# SSIM

def _random_image(seed, shape=(32, 32, 3)):
    return np.random.default_rng(seed).random(shape)


def test_ssim_identity_exact():
    for seed in range(5):
        img = _random_image(seed)
        assert ssim(img, img).mean_index == 1.0


def test_ssim_symmetry():
    a = _random_image(1)
    b = _random_image(2)
    assert abs(ssim(a, b).mean_index - ssim(b, a).mean_index) < 1e-12


def test_ssim_constant_images_closed_form():
    a = np.full((16, 16, 3), 0.2)
    b = np.full((16, 16, 3), 0.8)
    # zero variance: the structure/contrast term is exactly 1, only luminance
    # remains: (2*mu_a*mu_b + C1) / (mu_a^2 + mu_b^2 + C1)
    expect = (2 * 0.2 * 0.8 + SSIM_C1) / (0.2 ** 2 + 0.8 ** 2 + SSIM_C1)
    assert abs(ssim(a, b).mean_index - expect) < 1e-9


def test_ssim_identical_constants_are_one():
    a = np.full((16, 16, 3), 0.5)
    assert ssim(a, a.copy()).mean_index == 1.0


def test_ssim_size_mismatch():
    with pytest.raises(ValueError):
        ssim(_random_image(0, (16, 16, 3)), _random_image(0, (16, 17, 3)))


def test_ssim_minimum_size():
    with pytest.raises(ValueError):
        ssim(np.zeros((4, 4, 3)), np.zeros((4, 4, 3)))


def test_ssim_map_shape():
    res = ssim(_random_image(0, (20, 30, 3)), _random_image(1, (20, 30, 3)))
    assert res.index_map.shape == (13, 23)


def test_ssim_degrades_with_noise():
    base = _random_image(3)
    noisy = np.clip(base + np.random.default_rng(4).normal(0, 0.2, base.shape), 0, 1)
    assert ssim(base, noisy).mean_index < ssim(base, base).mean_index


def test_ssim_accepts_grayscale():
    img = np.random.default_rng(5).random((16, 16))
    assert ssim(img, img).mean_index == 1.0


def test_nearest_neighbor_needs_two_points():
    with pytest.raises(ValueError):
        nearest_neighbor_distances(np.zeros((1, 3)))

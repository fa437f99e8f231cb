"""Distribution-quality statistics for surfel prefixes and the SSIM index."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

SSIM_WINDOW = 8
SSIM_C1 = (0.01 * 1.0) ** 2  # dynamic range L = 1.0
SSIM_C2 = (0.03 * 1.0) ** 2

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


@dataclass
class DistanceStats:
    prefix_length: int
    distances: np.ndarray  # per-point min-neighbor distance, len = prefix_length
    normalized: bool = False

    @property
    def min(self) -> float:
        return float(self.distances.min())

    @property
    def max(self) -> float:
        return float(self.distances.max())

    @property
    def median(self) -> float:
        return float(np.median(self.distances))

    @property
    def quartiles(self) -> tuple[float, float, float]:
        q1, q2, q3 = np.percentile(self.distances, [25, 50, 75])
        return float(q1), float(q2), float(q3)


@dataclass
class SsimResult:
    mean_index: float
    index_map: np.ndarray  # per-window index, shape (H-7, W-7)


def nearest_neighbor_distances(positions: np.ndarray) -> np.ndarray:
    """Distance from each point to its nearest other point (kd-tree)."""
    pos = np.asarray(positions, dtype=np.float64)
    if len(pos) < 2:
        raise ValueError("need at least 2 points")
    dist, _ = cKDTree(pos).query(pos, k=2)
    return dist[:, 1]


def median_min_neighbor_distance(positions: np.ndarray) -> float:
    return float(np.median(nearest_neighbor_distances(positions)))


def min_neighbor_distances(cloud, prefix: int, normalized: bool = False) -> DistanceStats:
    """Min-neighbor distance for every surfel within the given prefix."""
    if prefix < 2:
        raise ValueError("prefix must be >= 2")
    if prefix > cloud.count:
        raise ValueError(f"prefix {prefix} exceeds cloud size {cloud.count}")
    d = nearest_neighbor_distances(cloud.positions[:prefix].astype(np.float64))
    if normalized:
        diag = cloud.bounds.diagonal
        if diag > 0.0:
            d = d / diag
    return DistanceStats(prefix, d, normalized=normalized)


def compute_r_m(cloud, p_m: int | None = None) -> float:
    """Median min-neighbor distance over the first min(p_m, count) surfels.

    Stored into the cloud's metadata alongside the reference prefix length.
    """
    if cloud.count < 2:
        raise ValueError("need at least 2 surfels to compute r_m")
    if p_m is None:
        p_m = cloud.p_m
    prefix = min(p_m, cloud.count)
    stats = min_neighbor_distances(cloud, prefix)
    cloud.p_m = p_m
    cloud.r_m = stats.median
    return cloud.r_m


def stats_to_csv(rows: list[DistanceStats], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["prefix", "min", "q1", "median", "q3", "max"])
        for s in rows:
            q1, q2, q3 = s.quartiles
            writer.writerow([s.prefix_length, s.min, q1, q2, q3, s.max])


def _to_luma(image: np.ndarray) -> np.ndarray:
    img = np.asarray(image, dtype=np.float64)
    if img.ndim == 3:
        img = img[..., :3] @ LUMA_WEIGHTS
    return img


def _window_sums(a: np.ndarray, w: int) -> np.ndarray:
    """Exact w-by-w box sums over all fully-contained windows (integral image)."""
    ii = np.zeros((a.shape[0] + 1, a.shape[1] + 1))
    np.cumsum(np.cumsum(a, axis=0), axis=1, out=ii[1:, 1:])
    return ii[w:, w:] - ii[:-w, w:] - ii[w:, :-w] + ii[:-w, :-w]


def ssim(image_a: np.ndarray, image_b: np.ndarray) -> SsimResult:
    """Single-scale SSIM on luma; 8x8 sliding windows, stride 1, L = 1.0."""
    a = _to_luma(image_a)
    b = _to_luma(image_b)
    if a.shape != b.shape:
        raise ValueError(f"image size mismatch: {a.shape} vs {b.shape}")
    if a.shape[0] < SSIM_WINDOW or a.shape[1] < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW}x{SSIM_WINDOW}")

    w = SSIM_WINDOW
    n = float(w * w)
    mu_a = _window_sums(a, w) / n
    mu_b = _window_sums(b, w) / n
    e_aa = _window_sums(a * a, w) / n
    e_bb = _window_sums(b * b, w) / n
    e_ab = _window_sums(a * b, w) / n
    var_a = e_aa - mu_a * mu_a
    var_b = e_bb - mu_b * mu_b
    cov = e_ab - mu_a * mu_b

    index_map = (((2.0 * mu_a * mu_b + SSIM_C1) * (2.0 * cov + SSIM_C2))
                 / ((mu_a * mu_a + mu_b * mu_b + SSIM_C1) * (var_a + var_b + SSIM_C2)))
    return SsimResult(float(index_map.mean()), index_map)

"""Candidate collection and progressive blue-noise sampling.

The progressive sampler approximates a greedy permutation (farthest-first
traversal) by drawing a small random subset of the remaining candidates each
round and keeping the draw's farthest member, so its cost depends on the
target count rather than the input size. The exact permutation and a uniform
random baseline are provided for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .geometry import AABB

DEDUP_GRID = 1e-7            # candidates closer than this share a cell and collapse
BRUTE_FORCE_CHOSEN = 256     # below this many chosen points, skip the kd-tree

DEFAULT_P_M = 1000


@dataclass
class Surfel:
    position: np.ndarray  # (3,) float32
    normal: np.ndarray    # (3,) float32, unit
    color: np.ndarray     # (4,) uint8


@dataclass
class CandidateSet:
    positions: np.ndarray  # (N, 3) float32
    normals: np.ndarray    # (N, 3) float32
    colors: np.ndarray     # (N, 4) uint8
    source_resolution: int = 0
    source_directions: int = 0

    @property
    def count(self) -> int:
        return len(self.positions)


@dataclass
class SamplingConfig:
    target_count: int
    sample_size: int = 200
    heuristic_period: int = 500  # draw size grows by one every this many rounds
    removal_radius_factor: float = 0.0  # 0 = off
    seed: int = 0

    def __post_init__(self):
        if self.target_count < 1:
            raise ValueError("target_count must be >= 1")
        if self.sample_size < 1:
            raise ValueError("sample_size must be >= 1")
        if self.heuristic_period < 1:
            raise ValueError("heuristic_period must be >= 1")


@dataclass
class SurfelCloud:
    positions: np.ndarray  # (n, 3) float32, generation order
    normals: np.ndarray    # (n, 3) float32
    colors: np.ndarray     # (n, 4) uint8
    p_m: int = DEFAULT_P_M
    r_m: float = 0.0       # median min-neighbor distance over the first p_m surfels
    bounds: AABB = field(default_factory=AABB.empty)
    seed: int | None = None

    @property
    def count(self) -> int:
        return len(self.positions)

    @property
    def r_m_valid(self) -> bool:
        return self.r_m > 0.0

    def colors_float(self) -> np.ndarray:
        return self.colors.astype(np.float64) / 255.0

    def surfel(self, i: int) -> Surfel:
        return Surfel(self.positions[i], self.normals[i], self.colors[i])

    def full_prefix_spacing(self) -> float:
        """Estimated min-neighbor spacing when the whole cloud is rendered."""
        if not self.r_m_valid or self.count < 2:
            return 0.0
        return self.r_m * float(np.sqrt(self.p_m / self.count))


def make_cloud(positions, normals, colors, p_m: int = DEFAULT_P_M,
               seed: int | None = None) -> SurfelCloud:
    """Assemble a cloud and precompute its prefix statistics (p_m, r_m)."""
    from .metrics import median_min_neighbor_distance

    positions = np.ascontiguousarray(positions, dtype=np.float32).reshape(-1, 3)
    normals = np.ascontiguousarray(normals, dtype=np.float32).reshape(-1, 3)
    colors = np.ascontiguousarray(colors, dtype=np.uint8).reshape(-1, 4)
    count = len(positions)
    r_m = 0.0
    if count >= 2:
        prefix = min(p_m, count)
        r_m = median_min_neighbor_distance(positions[:prefix].astype(np.float64))
    return SurfelCloud(positions, normals, colors, p_m=p_m, r_m=r_m,
                       bounds=AABB.from_points(positions), seed=seed)


def collect_candidates(buffers) -> CandidateSet:
    """One candidate per covered G-buffer pixel, deduplicated by position."""
    positions, normals, colors = [], [], []
    for gbuf in buffers.buffers:
        mask = gbuf.covered
        if not mask.any():
            continue
        positions.append(gbuf.position[mask].astype(np.float32))
        normals.append(gbuf.normal[mask].astype(np.float32))
        colors.append(np.clip(np.round(gbuf.color[mask] * 255.0), 0, 255).astype(np.uint8))
    if not positions:
        empty3 = np.empty((0, 3), dtype=np.float32)
        return CandidateSet(empty3, empty3.copy(), np.empty((0, 4), dtype=np.uint8),
                            buffers.resolution, len(buffers.buffers))
    pos = np.concatenate(positions)
    nrm = np.concatenate(normals)
    col = np.concatenate(colors)

    keys = np.round(pos.astype(np.float64) / DEDUP_GRID).astype(np.int64)
    _, first = np.unique(keys, axis=0, return_index=True)
    keep = np.sort(first)  # keep first occurrence, preserve scan order
    return CandidateSet(pos[keep], nrm[keep], col[keep],
                        buffers.resolution, len(buffers.buffers))


class _NearestChosenIndex:
    """Min-distance queries against an incrementally grown point set.

    A kd-tree covers the bulk; points added since the last rebuild are checked
    brute-force. For small sets everything is brute-force, which keeps the
    arithmetic bit-identical to the exact oracle's incremental updates.
    """

    def __init__(self, capacity: int):
        self.pts = np.empty((capacity, 3))
        self.n = 0
        self.tree = None
        self.tree_n = 0

    def add(self, p: np.ndarray) -> None:
        self.pts[self.n] = p
        self.n += 1

    def query_sq(self, q: np.ndarray) -> np.ndarray:
        if self.n > BRUTE_FORCE_CHOSEN and self.n - self.tree_n > 64:
            self.tree = cKDTree(self.pts[:self.n])
            self.tree_n = self.n
        d2 = np.full(len(q), np.inf)
        if self.tree is not None:
            dist, _ = self.tree.query(q, k=1)
            d2 = dist * dist
        recent = self.pts[self.tree_n:self.n]
        if len(recent):
            diff = q[:, None, :] - recent[None, :, :]
            d2 = np.minimum(d2, np.einsum("mnj,mnj->mn", diff, diff).min(axis=1))
        return d2


def _draw_without_replacement(rng, pool_size: int, m: int) -> np.ndarray:
    """m distinct uniform indices in [0, pool_size); O(m) expected."""
    sel = np.unique(rng.integers(0, pool_size, size=m))
    while len(sel) < m:
        extra = rng.integers(0, pool_size, size=m - len(sel))
        sel = np.unique(np.concatenate([sel, extra]))
    return sel


def sample_progressive(candidates: CandidateSet, config: SamplingConfig) -> SurfelCloud:
    """Approximate greedy permutation by randomized farthest-candidate rounds.

    Round i draws sample_size + i // heuristic_period distinct candidates from
    the remaining input and keeps the one farthest from everything chosen so
    far (ties: lowest candidate index). Deterministic for a fixed seed.
    """
    n = candidates.count
    if n == 0:
        raise ValueError("candidate set is empty")
    target = min(config.target_count, n)
    rng = np.random.default_rng(config.seed)
    pos = candidates.positions.astype(np.float64)

    remaining = np.arange(n, dtype=np.int64)
    rem_count = n
    chosen = np.empty(target, dtype=np.int64)
    index = _NearestChosenIndex(target)

    def swap_remove(slot: int):
        nonlocal rem_count
        remaining[slot] = remaining[rem_count - 1]
        rem_count -= 1

    first_slot = int(rng.integers(rem_count))
    chosen[0] = remaining[first_slot]
    index.add(pos[chosen[0]])
    swap_remove(first_slot)

    for i in range(1, target):
        m = config.sample_size + i // config.heuristic_period
        if m >= rem_count:
            slots = np.arange(rem_count, dtype=np.int64)
        else:
            slots = _draw_without_replacement(rng, rem_count, m)
        draw_ids = remaining[slots]
        d2 = index.query_sq(pos[draw_ids])

        best = d2.max()
        ties = np.nonzero(d2 == best)[0]
        pick_local = ties[np.argmin(draw_ids[ties])] if len(ties) > 1 else ties[0]
        pick_id = draw_ids[pick_local]
        chosen[i] = pick_id
        index.add(pos[pick_id])

        drop_slots = [int(slots[pick_local])]
        if config.removal_radius_factor > 0.0:
            radius_sq = (config.removal_radius_factor ** 2) * best
            close = np.nonzero(d2 < radius_sq)[0]
            drop_slots.extend(int(slots[c]) for c in close if c != pick_local)
        for slot in sorted(set(drop_slots), reverse=True):
            swap_remove(slot)
        if rem_count == 0:
            chosen = chosen[:i + 1]
            break

    sel = chosen
    return make_cloud(candidates.positions[sel], candidates.normals[sel],
                      candidates.colors[sel], seed=config.seed)


def exact_greedy_permutation(candidates: CandidateSet, start: int,
                             target_count: int | None = None) -> SurfelCloud:
    """True farthest-first traversal; ties broken by lowest candidate index."""
    n = candidates.count
    if n == 0:
        raise ValueError("candidate set is empty")
    if not 0 <= start < n:
        raise IndexError(f"start index {start} out of range for {n} candidates")
    target = n if target_count is None else min(target_count, n)
    pos = candidates.positions.astype(np.float64)

    order = np.empty(target, dtype=np.int64)
    order[0] = start
    diff = pos - pos[start]
    min_d2 = np.einsum("nj,nj->n", diff, diff)
    min_d2[start] = -np.inf
    for i in range(1, target):
        pick = int(np.argmax(min_d2))  # first occurrence = lowest index on ties
        order[i] = pick
        diff = pos - pos[pick]
        d2 = np.einsum("nj,nj->n", diff, diff)
        np.minimum(min_d2, d2, out=min_d2)
        min_d2[pick] = -np.inf

    return make_cloud(candidates.positions[order], candidates.normals[order],
                      candidates.colors[order])


def sample_random(candidates: CandidateSet, target_count: int, seed: int = 0) -> SurfelCloud:
    """Uniform random order; baseline for distribution-quality comparisons."""
    n = candidates.count
    if n == 0:
        raise ValueError("candidate set is empty")
    rng = np.random.default_rng(seed)
    sel = rng.permutation(n)[:min(target_count, n)]
    return make_cloud(candidates.positions[sel], candidates.normals[sel],
                      candidates.colors[sel], seed=seed)

"""Desk-scale evaluation harness: per-view statistics, frame-time
distributions over position grids, and preprocessing stage timings."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import AABB
from .metrics import ssim
from .prefixmath import BudgetController, CameraModel, Geometry, SurfelPrefix, budget_update, select_render_actions
from .raster import CaptureConfig, capture_gbuffers
from .renderer import FrameBuffer, geometry_actions, render_frame
from .sampling import SamplingConfig, collect_candidates, sample_progressive
from .scene import SceneNode, TriangleMesh, update_node_caches


@dataclass
class ViewRow:
    view: int
    resolution: int
    lod: bool
    draw_calls: int
    triangles: int
    surfels: int
    frame_ms: float
    ssim_vs_nolod: float


@dataclass
class BenchReport:
    rows: list[ViewRow] = field(default_factory=list)
    grid_times_ms: list[float] = field(default_factory=list)

    def quartiles(self):
        q1, q2, q3 = np.percentile(self.grid_times_ms, [25, 50, 75])
        return float(q1), float(q2), float(q3)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["view", "resolution", "lod", "draw_calls",
                             "triangles", "surfels", "frame_ms", "ssim"])
            for r in self.rows:
                writer.writerow([r.view, r.resolution, int(r.lod), r.draw_calls,
                                 r.triangles, r.surfels, f"{r.frame_ms:.3f}",
                                 f"{r.ssim_vs_nolod:.4f}"])


def _action_stats(actions):
    draw_calls = triangles = surfels = 0
    for node, action in actions:
        if isinstance(action, Geometry):
            draw_calls += 1
            triangles += node.mesh.triangle_count
        elif isinstance(action, SurfelPrefix):
            draw_calls += 1
            surfels += action.count
    return draw_calls, triangles, surfels


def run_views(scene: SceneNode, views: list[CameraModel], resolutions: list[int],
              surfel_size: float = 2.0) -> BenchReport:
    """Render each view at each resolution with and without LOD."""
    report = BenchReport()
    for vi, view in enumerate(views):
        for res in resolutions:
            camera = replace(view, viewport=(res, res))

            start = time.perf_counter()
            truth_actions = geometry_actions(scene)
            truth = render_frame(truth_actions, camera)
            truth_ms = (time.perf_counter() - start) * 1000.0
            dc, tris, _ = _action_stats(truth_actions)
            report.rows.append(ViewRow(vi, res, False, dc, tris, 0, truth_ms, 1.0))

            start = time.perf_counter()
            actions = select_render_actions(scene, camera, surfel_size=surfel_size)
            frame = render_frame(actions, camera)
            lod_ms = (time.perf_counter() - start) * 1000.0
            dc, tris, surf = _action_stats(actions)
            quality = ssim(truth.rgb(), frame.rgb()).mean_index
            report.rows.append(ViewRow(vi, res, True, dc, tris, surf, lod_ms, quality))
    return report


CARDINAL = [(1.0, 0.0, 0.0), (-1.0, 0.0, 0.0), (0.0, 0.0, 1.0), (0.0, 0.0, -1.0)]


def run_position_grid(scene: SceneNode, region: AABB, count: int, height: float,
                      t_target: float, resolution: int = 128) -> BenchReport:
    """Frame times at `count` uniformly gridded positions, 4 cardinal
    directions each, with the adaptive surfel-size controller active."""
    report = BenchReport()
    side = max(int(np.ceil(np.sqrt(count))), 1)
    xs = np.linspace(region.lo[0], region.hi[0], side)
    zs = np.linspace(region.lo[2], region.hi[2], side)
    positions = [(x, height, z) for x in xs for z in zs][:count]

    ctrl = BudgetController(t_target=t_target)
    for pos in positions:
        for d in CARDINAL:
            camera = CameraModel.look_at(pos, np.asarray(pos) + np.asarray(d),
                                         viewport=(resolution, resolution))
            start = time.perf_counter()
            actions = select_render_actions(scene, camera, ctrl=ctrl)
            render_frame(actions, camera)
            frame_ms = (time.perf_counter() - start) * 1000.0
            budget_update(ctrl, max(frame_ms, 1e-3))
            report.grid_times_ms.append(frame_ms)
    return report


@dataclass
class PreprocessRow:
    surfel_count: int
    capture_ms: float
    candidate_ms: float
    sampling_ms: float

    @property
    def total_ms(self) -> float:
        return self.capture_ms + self.candidate_ms + self.sampling_ms


def time_preprocessing(mesh: TriangleMesh, surfel_counts: list[int],
                       resolution: int = 256, sample_size: int = 200,
                       seed: int = 0) -> list[PreprocessRow]:
    """Wall-clock stage timings per target count (reported, not asserted)."""
    node = update_node_caches(SceneNode(id="bench", mesh=mesh))
    config = CaptureConfig(resolution=resolution)
    rows = []
    for target in surfel_counts:
        start = time.perf_counter()
        buffers = capture_gbuffers(node, config)
        capture_ms = (time.perf_counter() - start) * 1000.0

        start = time.perf_counter()
        candidates = collect_candidates(buffers)
        candidate_ms = (time.perf_counter() - start) * 1000.0

        start = time.perf_counter()
        sample_progressive(candidates, SamplingConfig(target_count=target,
                                                      sample_size=sample_size, seed=seed))
        sampling_ms = (time.perf_counter() - start) * 1000.0
        rows.append(PreprocessRow(target, capture_ms, candidate_ms, sampling_ms))
    return rows


def preprocess_to_csv(rows: list[PreprocessRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["surfel_count", "capture_ms", "candidate_ms", "sampling_ms", "total_ms"])
        for r in rows:
            writer.writerow([r.surfel_count, f"{r.capture_ms:.2f}", f"{r.candidate_ms:.2f}",
                             f"{r.sampling_ms:.2f}", f"{r.total_ms:.2f}"])

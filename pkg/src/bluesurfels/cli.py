"""Command-line entry points: LOD building, headless rendering, benchmarks,
debug dumps, and static serving for the web viewer."""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path

import click
import numpy as np

from . import bench as bench_mod
from .geometry import AABB
from .images import save_image
from .lodpipe import LodPolicy, build_scene_from_mesh, generate_lods, read_manifest, write_manifest
from .meshgen import instanced_grid_scene, uv_sphere
from .prefixmath import CameraModel, select_render_actions
from .raster import CaptureConfig, capture_gbuffers, gbuffer_channel_image
from .renderer import geometry_actions, render_frame
from .sampling import SamplingConfig
from .scene import SceneNode, update_node_caches
from .vectors import export_test_vectors


@click.group()
@click.option("--verbose", is_flag=True)
def main(verbose):
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")


def _load_scene(path: str) -> SceneNode:
    p = Path(path)
    if p.is_dir():
        return read_manifest(p)
    return build_scene_from_mesh(p)


def _load_camera(pose_file: str, size: tuple[int, int]) -> CameraModel:
    pose = json.loads(Path(pose_file).read_text())
    return CameraModel.look_at(
        pose["position"], pose["target"], up=pose.get("up", (0.0, 1.0, 0.0)),
        viewport=size, fov_y=math.radians(pose.get("fov_deg", 60.0)))


@main.command()
@click.option("--scene", "scene_path", required=True, help="scene manifest dir or mesh file")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--resolution", default=1024, show_default=True)
@click.option("--sample-size", default=200, show_default=True)
@click.option("--k", default=500, show_default=True, help="heuristic period")
@click.option("--max-surfels", default=200000, show_default=True)
@click.option("--lod-threshold", default=10000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--threads", default=1, show_default=True)
@click.option("--top-down", is_flag=True, help="capture original geometry instead of child LODs")
def build(scene_path, out_dir, resolution, sample_size, k, max_surfels,
          lod_threshold, seed, threads, top_down):
    """Generate surfel LODs for a scene and persist manifest + surfel files."""
    del threads  # accepted for interface compatibility; generation is sequential
    scene = _load_scene(scene_path)
    policy = LodPolicy(min_triangles_for_lod=min(1000, lod_threshold),
                       lod_triangle_threshold=lod_threshold,
                       max_surfels=max_surfels, bottom_up=not top_down)
    generate_lods(scene, policy,
                  CaptureConfig(resolution=resolution),
                  SamplingConfig(target_count=1, sample_size=sample_size,
                                 heuristic_period=k, seed=seed))
    path = write_manifest(scene, out_dir)
    lods = sum(1 for n in scene.walk() if n.lod is not None)
    click.echo(f"wrote {path} ({lods} LODs)")


@main.command()
@click.option("--scene", "scene_path", required=True)
@click.option("--camera", "pose_file", required=True, type=click.Path(exists=True))
@click.option("--size", default="512x512", show_default=True)
@click.option("--surfel-size", default=2.0, show_default=True)
@click.option("--no-lod", is_flag=True)
@click.option("--out", "out_file", default="frame.png", show_default=True)
def render(scene_path, pose_file, size, surfel_size, no_lod, out_file):
    """Render one frame headlessly to PNG/PPM."""
    w, h = (int(v) for v in size.lower().split("x"))
    scene = _load_scene(scene_path)
    update_node_caches(scene)
    camera = _load_camera(pose_file, (w, h))
    if no_lod:
        actions = geometry_actions(scene)
    else:
        actions = select_render_actions(scene, camera, surfel_size=surfel_size)
    fb = render_frame(actions, camera)
    save_image(out_file, fb.rgb())
    click.echo(f"wrote {out_file} ({len(actions)} actions)")


@main.group()
def bench():
    """Evaluation harnesses (CSV reports)."""


@bench.command()
@click.option("--scene", "scene_path", required=True)
@click.option("--out", "out_file", default="views.csv", show_default=True)
@click.option("--resolutions", default="128,256", show_default=True)
@click.option("--views", "view_count", default=4, show_default=True)
def views(scene_path, out_file, resolutions, view_count):
    """Per-view statistics with and without LOD."""
    scene = _load_scene(scene_path)
    update_node_caches(scene)
    res = [int(v) for v in resolutions.split(",")]
    center = scene.bounds.center
    dist = scene.bounds.diagonal
    cams = []
    for i in range(view_count):
        angle = 2.0 * math.pi * i / view_count
        pos = center + dist * np.array([math.cos(angle), 0.4, math.sin(angle)])
        cams.append(CameraModel.look_at(pos, center))
    report = bench_mod.run_views(scene, cams, res)
    report.to_csv(out_file)
    click.echo(f"wrote {out_file} ({len(report.rows)} rows)")


@bench.command()
@click.option("--scene", "scene_path", required=True)
@click.option("--out", "out_file", default="grid.csv", show_default=True)
@click.option("--count", default=9, show_default=True)
@click.option("--height", default=1.0, show_default=True)
@click.option("--t-target", default=30.0, show_default=True)
def grid(scene_path, out_file, count, height, t_target):
    """Frame-time distribution over a position grid with the adaptive controller."""
    scene = _load_scene(scene_path)
    update_node_caches(scene)
    report = bench_mod.run_position_grid(scene, scene.bounds, count, height, t_target)
    with open(out_file, "w") as fh:
        fh.write("frame_ms\n")
        fh.writelines(f"{t:.3f}\n" for t in report.grid_times_ms)
    q1, q2, q3 = report.quartiles()
    click.echo(f"wrote {out_file}; quartiles {q1:.2f}/{q2:.2f}/{q3:.2f} ms")


@bench.command()
@click.option("--mesh", "mesh_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_file", default="preprocess.csv", show_default=True)
@click.option("--counts", default="10000,50000,100000", show_default=True)
@click.option("--resolution", default=256, show_default=True)
def preprocess(mesh_path, out_file, counts, resolution):
    """Stage timings of the preprocessing pipeline per target surfel count."""
    from .scene import load_mesh
    mesh = load_mesh(mesh_path)
    rows = bench_mod.time_preprocessing(mesh, [int(v) for v in counts.split(",")],
                                        resolution=resolution)
    bench_mod.preprocess_to_csv(rows, out_file)
    click.echo(f"wrote {out_file}")


@main.command("dump-gbuffer")
@click.option("--scene", "scene_path", required=True)
@click.option("--channel", default="color", show_default=True,
              type=click.Choice(["color", "normal", "position", "depth", "coverage"]))
@click.option("--resolution", default=256, show_default=True)
@click.option("--out", "out_prefix", default="gbuffer", show_default=True)
def dump_gbuffer(scene_path, channel, resolution, out_prefix):
    """Write one image per capture direction for visual inspection."""
    scene = _load_scene(scene_path)
    update_node_caches(scene)
    buffers = capture_gbuffers(scene, CaptureConfig(resolution=resolution))
    for i, gbuf in enumerate(buffers.buffers):
        path = f"{out_prefix}_{channel}_{i}.png"
        save_image(path, gbuffer_channel_image(gbuf, channel))
        click.echo(f"wrote {path}")


@main.command()
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--grid", "grid_size", default=3, show_default=True)
@click.option("--rings", default=48, show_default=True)
@click.option("--seed", default=7, show_default=True)
def gen(out_dir, grid_size, rings, seed):
    """Generate a seeded procedural test scene manifest (no LODs yet)."""
    scene = instanced_grid_scene(nx=grid_size, nz=grid_size, rings=rings,
                                 segments=rings, seed=seed)
    path = write_manifest(scene, out_dir)
    click.echo(f"wrote {path}")


@main.command("export-vectors")
@click.option("--out", "out_file", default="test_vectors.json", show_default=True)
def export_vectors(out_file):
    """Export the shared formula test vectors for the web viewer."""
    export_test_vectors(out_file)
    click.echo(f"wrote {out_file}")


@main.command()
@click.option("--scene", "scene_dir", required=True, type=click.Path(exists=True))
@click.option("--viewer", "viewer_dir", default=None, type=click.Path(exists=True),
              help="built web viewer directory served at /")
@click.option("--port", default=8000, show_default=True)
def serve(scene_dir, viewer_dir, port):
    """Serve a built scene directory (and optionally the viewer) over HTTP."""
    import http.server

    scene_root = Path(scene_dir).resolve()
    viewer_root = Path(viewer_dir).resolve() if viewer_dir else None

    class Handler(http.server.SimpleHTTPRequestHandler):
        def translate_path(self, path):
            path = path.split("?", 1)[0].split("#", 1)[0]
            if path.startswith("/scene/"):
                return str(scene_root / path[len("/scene/"):])
            root = viewer_root if viewer_root is not None else scene_root
            rel = path.lstrip("/") or "index.html"
            return str(root / rel)

        def end_headers(self):
            self.send_header("Access-Control-Allow-Origin", "*")
            super().end_headers()

    with http.server.ThreadingHTTPServer(("0.0.0.0", port), Handler) as httpd:
        click.echo(f"serving {scene_root} at http://localhost:{port}/scene/ "
                   f"(viewer root: {viewer_root or scene_root})")
        httpd.serve_forever()


if __name__ == "__main__":
    main()

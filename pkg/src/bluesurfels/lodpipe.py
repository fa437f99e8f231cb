"""Hierarchical LOD generation over the scene graph and persistence of surfel
clouds (binary) and scene manifests (JSON + referenced files)."""

from __future__ import annotations

import json
import logging
import struct
import zlib
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .geometry import AABB
from .raster import CaptureConfig, capture_gbuffers
from .sampling import CandidateSet, SamplingConfig, SurfelCloud, collect_candidates, sample_progressive
from .scene import SceneNode, TriangleMesh, load_mesh, save_mesh_ply

log = logging.getLogger(__name__)

SURFEL_MAGIC = b"PBS1"
SURFEL_VERSION = 1
_HEADER = struct.Struct("<4sIQId6d")  # magic, version, count, p_m, r_m, bounds
_RECORD_DTYPE = np.dtype([("position", "<f4", 3), ("normal", "<f4", 3), ("color", "u1", 4)])


class SurfelFileError(Exception):
    pass


@dataclass
class LodPolicy:
    min_triangles_for_lod: int = 1000     # below this, only group-level LODs
    lod_triangle_threshold: int = 10000   # nodes above this get their own LOD
    max_surfels: int = 200000
    bottom_up: bool = True

    def __post_init__(self):
        if self.min_triangles_for_lod > self.lod_triangle_threshold:
            raise ValueError("min_triangles_for_lod must be <= lod_triangle_threshold")

    def surfel_count(self, triangle_count: int) -> int:
        return min(self.max_surfels, triangle_count // 2)

    def wants_lod(self, node: SceneNode) -> bool:
        return node.triangle_count > self.lod_triangle_threshold


def _node_seed(base_seed: int, node_id: str) -> int:
    return (base_seed * 1000003 + zlib.crc32(node_id.encode("utf-8"))) & 0xFFFFFFFFFFFFFFFF


def generate_lods(scene: SceneNode, policy: LodPolicy | None = None,
                  capture_config: CaptureConfig | None = None,
                  sampling_config: SamplingConfig | None = None) -> SceneNode:
    """Attach surfel clouds to every node above the policy's triangle threshold.

    Bottom-up mode rasterizes already-approximated children as surfel discs
    instead of their full geometry. target_count in the sampling config is
    overridden per node by the policy's surfel-count rule.
    """
    policy = policy or LodPolicy()
    capture_config = capture_config or CaptureConfig()
    sampling_config = sampling_config or SamplingConfig(target_count=1)

    nodes = [n for n in scene.walk() if policy.wants_lod(n)]
    if policy.bottom_up:
        nodes.sort(key=_subtree_depth)  # children before parents
    else:
        nodes.sort(key=_subtree_depth, reverse=True)

    for node in nodes:
        target = policy.surfel_count(node.triangle_count)
        if target < 1:
            continue
        buffers = capture_gbuffers(node, capture_config, use_child_lods=policy.bottom_up)
        candidates = collect_candidates(buffers)
        if candidates.count == 0:
            log.warning("node %s produced no surfel candidates; skipping LOD", node.id)
            continue
        config = replace(sampling_config, target_count=target,
                         seed=_node_seed(sampling_config.seed, node.id))
        node.lod = sample_progressive(candidates, config)
    return scene


def _subtree_depth(node: SceneNode) -> int:
    if not node.children:
        return 0
    return 1 + max(_subtree_depth(c) for c in node.children)


# ---------------------------------------------------------------------------
# Surfel file persistence

def write_surfel_file(cloud: SurfelCloud, path) -> None:
    bounds = cloud.bounds
    lo = bounds.lo if not bounds.is_empty() else np.zeros(3)
    hi = bounds.hi if not bounds.is_empty() else np.zeros(3)
    header = _HEADER.pack(SURFEL_MAGIC, SURFEL_VERSION, cloud.count, cloud.p_m,
                          float(cloud.r_m), *lo, *hi)
    records = np.empty(cloud.count, dtype=_RECORD_DTYPE)
    records["position"] = cloud.positions
    records["normal"] = cloud.normals
    records["color"] = cloud.colors
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(records.tobytes())


def read_surfel_file(path) -> SurfelCloud:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise SurfelFileError(f"{path}: truncated header "
                              f"(expected {_HEADER.size} bytes, got {len(data)})")
    magic, version, count, p_m, r_m, *box = _HEADER.unpack_from(data)
    if magic != SURFEL_MAGIC:
        raise SurfelFileError(f"{path}: bad magic {magic!r}")
    if version != SURFEL_VERSION:
        raise SurfelFileError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + count * _RECORD_DTYPE.itemsize
    if len(data) != expected:
        raise SurfelFileError(f"{path}: payload size mismatch "
                              f"(expected {expected} bytes, got {len(data)})")
    records = np.frombuffer(data, dtype=_RECORD_DTYPE, count=count, offset=_HEADER.size)
    bounds = AABB(np.array(box[:3]), np.array(box[3:]))
    if count == 0:
        bounds = AABB.empty()
    return SurfelCloud(
        positions=records["position"].copy(),
        normals=records["normal"].copy(),
        colors=records["color"].copy(),
        p_m=p_m, r_m=r_m, bounds=bounds,
    )


# ---------------------------------------------------------------------------
# Scene manifest

MANIFEST_NAME = "manifest.json"


def write_manifest(scene: SceneNode, out_dir) -> Path:
    """Persist the node tree plus referenced mesh and surfel files.

    Meshes shared between nodes are written once (content-addressed).
    """
    out_dir = Path(out_dir)
    (out_dir / "meshes").mkdir(parents=True, exist_ok=True)
    (out_dir / "surfels").mkdir(parents=True, exist_ok=True)
    mesh_files: dict[int, str] = {}

    def encode(node: SceneNode) -> dict:
        entry: dict = {
            "id": node.id,
            "transform": [float(v) for v in np.asarray(node.transform).reshape(16)],
            "bounds": [float(v) for v in np.concatenate([node.bounds.lo, node.bounds.hi])]
            if not node.bounds.is_empty() else None,
            "triangle_count": int(node.triangle_count),
        }
        if node.mesh is not None:
            key = id(node.mesh)
            if key not in mesh_files:
                digest = node.mesh.content_digest()
                rel = f"meshes/{digest}.ply"
                if not (out_dir / rel).exists():
                    save_mesh_ply(node.mesh, out_dir / rel)
                mesh_files[key] = rel
            entry["mesh"] = mesh_files[key]
        if node.lod is not None:
            rel = f"surfels/{node.id}.pbs"
            write_surfel_file(node.lod, out_dir / rel)
            entry["lod"] = {
                "file": rel,
                "count": int(node.lod.count),
                "p_m": int(node.lod.p_m),
                "r_m": float(node.lod.r_m),
            }
        if node.children:
            entry["children"] = [encode(c) for c in node.children]
        return entry

    manifest = {"format": "bluesurfels-scene", "version": 1, "root": encode(scene)}
    path = out_dir / MANIFEST_NAME
    path.write_text(json.dumps(manifest, indent=1))
    return path


def read_manifest(directory) -> SceneNode:
    directory = Path(directory)
    manifest = json.loads((directory / MANIFEST_NAME).read_text())
    if manifest.get("format") != "bluesurfels-scene":
        raise ValueError(f"{directory}: not a bluesurfels scene manifest")
    mesh_cache: dict[str, TriangleMesh] = {}

    def decode(entry: dict) -> SceneNode:
        node = SceneNode(
            id=entry["id"],
            transform=np.array(entry["transform"], dtype=np.float64).reshape(4, 4),
        )
        node.triangle_count = entry.get("triangle_count", 0)
        box = entry.get("bounds")
        if box is not None:
            node.bounds = AABB(np.array(box[:3]), np.array(box[3:]))
        mesh_ref = entry.get("mesh")
        if mesh_ref is not None:
            if mesh_ref not in mesh_cache:
                mesh_path = directory / mesh_ref
                if not mesh_path.exists():
                    raise FileNotFoundError(f"manifest references missing mesh file: {mesh_ref}")
                mesh_cache[mesh_ref] = load_mesh(mesh_path, "PLY")
            node.mesh = mesh_cache[mesh_ref]
        lod_ref = entry.get("lod")
        if lod_ref is not None:
            lod_path = directory / lod_ref["file"]
            if not lod_path.exists():
                raise FileNotFoundError(f"manifest references missing surfel file: {lod_ref['file']}")
            node.lod = read_surfel_file(lod_path)
        for child in entry.get("children", []):
            node.children.append(decode(child))
        return node

    return decode(manifest["root"])


def build_scene_from_mesh(path, node_id: str = "object") -> SceneNode:
    """Single-node scene around one mesh file."""
    from .scene import update_node_caches
    mesh = load_mesh(path)
    node = SceneNode(id=node_id, mesh=mesh)
    return update_node_caches(node)


def candidates_from_mesh(mesh: TriangleMesh, resolution: int = 1024) -> CandidateSet:
    """Capture and candidate collection for a bare mesh (test/bench helper)."""
    from .scene import update_node_caches
    node = update_node_caches(SceneNode(id="mesh", mesh=mesh))
    return collect_candidates(capture_gbuffers(node, CaptureConfig(resolution=resolution)))

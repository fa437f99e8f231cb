"""Scene graph, mesh loading (OBJ / binary PLY), and loose-octree spatial organization."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import (
    AABB,
    identity_transform,
    normalized_rows,
    transform_directions,
    transform_points,
)

DEFAULT_COLOR = (0.5, 0.5, 0.5, 1.0)

OCTREE_LOOSENESS = 2.0
OCTREE_MAX_ITEMS = 8
OCTREE_MAX_DEPTH = 21


class MeshParseError(Exception):
    """Raised when a mesh file cannot be parsed; carries file and line/offset info."""

    def __init__(self, path, location, message):
        self.path = str(path)
        self.location = location
        super().__init__(f"{path}:{location}: {message}")


@dataclass
class TriangleMesh:
    positions: np.ndarray  # (V, 3) float64
    normals: np.ndarray    # (V, 3) float64, unit length
    colors: np.ndarray     # (V, 4) float64 in [0, 1]
    triangles: np.ndarray  # (T, 3) int32

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int32).reshape(-1, 3)
        if self.normals is None or len(self.normals) == 0:
            self.normals = area_weighted_normals(self.positions, self.triangles)
        self.normals = normalized_rows(np.asarray(self.normals, dtype=np.float64).reshape(-1, 3))
        if self.colors is None or len(self.colors) == 0:
            self.colors = np.tile(np.array(DEFAULT_COLOR), (len(self.positions), 1))
        self.colors = np.asarray(self.colors, dtype=np.float64).reshape(-1, 4)

    @property
    def triangle_count(self) -> int:
        return len(self.triangles)

    def bounds(self) -> AABB:
        return AABB.from_points(self.positions)

    def content_digest(self) -> str:
        import hashlib
        h = hashlib.sha256()
        for arr in (self.positions, self.normals, self.colors, self.triangles):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()[:16]


def area_weighted_normals(positions: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    normals = np.zeros_like(positions)
    if len(triangles):
        a = positions[triangles[:, 0]]
        b = positions[triangles[:, 1]]
        c = positions[triangles[:, 2]]
        face = np.cross(b - a, c - a)  # length proportional to area
        for k in range(3):
            np.add.at(normals, triangles[:, k], face)
    lengths = np.linalg.norm(normals, axis=1)
    degenerate = lengths < 1e-20
    normals[degenerate] = (0.0, 0.0, 1.0)
    return normalized_rows(normals)


@dataclass
class SceneNode:
    id: str
    transform: np.ndarray = field(default_factory=identity_transform)  # local-to-world
    mesh: TriangleMesh | None = None
    children: list["SceneNode"] = field(default_factory=list)
    lod: object | None = None  # SurfelCloud, attached by lodpipe
    bounds: AABB = field(default_factory=AABB.empty)  # world space
    triangle_count: int = 0

    def is_leaf(self) -> bool:
        return not self.children

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()

    def leaves(self):
        for n in self.walk():
            if n.is_leaf():
                yield n


def node_bounds_world(node: SceneNode) -> AABB:
    """Tight world box over the transformed geometry of the subtree."""
    box = AABB.empty()
    for leaf in node.leaves():
        if leaf.mesh is not None and len(leaf.mesh.positions):
            pts = transform_points(leaf.transform, leaf.mesh.positions)
            box = box.union(AABB.from_points(pts))
        elif leaf.lod is not None:
            box = box.union(leaf.lod.bounds.transformed(leaf.transform))
    return box


def update_node_caches(node: SceneNode) -> SceneNode:
    """Refresh bounds and triangleCount bottom-up over the subtree."""
    count = node.mesh.triangle_count if node.mesh is not None else 0
    for child in node.children:
        update_node_caches(child)
        count += child.triangle_count
    node.triangle_count = count
    node.bounds = node_bounds_world(node)
    return node


# ---------------------------------------------------------------------------
# Mesh loading

def load_mesh(path, fmt: str | None = None) -> TriangleMesh:
    """Load an OBJ or binary little-endian PLY file.

    Missing normals are computed area-weighted; missing colors default to
    opaque mid-gray. Normals are renormalized on load.
    """
    path = Path(path)
    if fmt is None:
        fmt = path.suffix.lstrip(".").upper() or "OBJ"
    fmt = fmt.upper()
    if fmt == "OBJ":
        mesh = _load_obj(path)
    elif fmt == "PLY":
        mesh = _load_ply(path)
    else:
        raise ValueError(f"unsupported mesh format: {fmt}")
    if mesh.triangle_count == 0:
        raise MeshParseError(path, 0, "mesh contains no triangles")
    return mesh


def _parse_mtl(path: Path) -> dict:
    """Minimal MTL parser: material name -> combined RGBA color.

    Ambient and diffuse are merged 1:3; specular is ignored.
    """
    materials = {}
    current = None
    try:
        lines = path.read_text().splitlines()
    except OSError:
        return materials
    for line in lines:
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "newmtl":
            current = parts[1] if len(parts) > 1 else ""
            materials[current] = {"Ka": np.zeros(3), "Kd": np.array([0.5, 0.5, 0.5])}
        elif parts[0] in ("Ka", "Kd") and current is not None and len(parts) >= 4:
            materials[current][parts[0]] = np.array([float(v) for v in parts[1:4]])
    combined = {}
    for name, m in materials.items():
        rgb = np.clip(0.25 * m["Ka"] + 0.75 * m["Kd"], 0.0, 1.0)
        combined[name] = np.array([rgb[0], rgb[1], rgb[2], 1.0])
    return combined


def _load_obj(path: Path) -> TriangleMesh:
    raw_positions: list = []
    raw_normals: list = []
    materials: dict = {}
    current_color = np.array(DEFAULT_COLOR)

    vertex_keys: dict = {}
    out_positions: list = []
    out_normals: list = []
    out_colors: list = []
    out_has_normal: list = []
    triangles: list = []

    def resolve(idx: int, count: int, lineno: int, what: str) -> int:
        j = idx + count if idx < 0 else idx - 1
        if j < 0 or j >= count:
            raise MeshParseError(path, lineno, f"{what} index {idx} out of range (have {count})")
        return j

    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise MeshParseError(path, 0, str(exc)) from exc

    for lineno, line in enumerate(lines, start=1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        tag = parts[0]
        try:
            if tag == "v":
                raw_positions.append([float(v) for v in parts[1:4]])
            elif tag == "vn":
                raw_normals.append([float(v) for v in parts[1:4]])
            elif tag == "mtllib":
                materials.update(_parse_mtl(path.parent / " ".join(parts[1:])))
            elif tag == "usemtl":
                name = parts[1] if len(parts) > 1 else ""
                current_color = materials.get(name, np.array(DEFAULT_COLOR))
            elif tag == "f":
                corner_ids = []
                for token in parts[1:]:
                    fields = token.split("/")
                    vi = resolve(int(fields[0]), len(raw_positions), lineno, "vertex")
                    ni = None
                    if len(fields) >= 3 and fields[2]:
                        ni = resolve(int(fields[2]), len(raw_normals), lineno, "normal")
                    key = (vi, ni, tuple(current_color))
                    if key not in vertex_keys:
                        vertex_keys[key] = len(out_positions)
                        out_positions.append(raw_positions[vi])
                        out_normals.append(raw_normals[ni] if ni is not None else (0.0, 0.0, 0.0))
                        out_has_normal.append(ni is not None)
                        out_colors.append(current_color)
                    corner_ids.append(vertex_keys[key])
                for k in range(1, len(corner_ids) - 1):  # fan triangulation
                    triangles.append((corner_ids[0], corner_ids[k], corner_ids[k + 1]))
        except (ValueError, IndexError) as exc:
            raise MeshParseError(path, lineno, f"malformed '{tag}' statement: {exc}") from exc

    if not out_positions:
        raise MeshParseError(path, 0, "no geometry found")

    positions = np.array(out_positions, dtype=np.float64)
    tri = np.array(triangles, dtype=np.int32).reshape(-1, 3)
    normals = np.array(out_normals, dtype=np.float64)
    if not all(out_has_normal):
        computed = area_weighted_normals(positions, tri)
        missing = ~np.array(out_has_normal)
        normals[missing] = computed[missing]
    return TriangleMesh(positions, normals, np.array(out_colors, dtype=np.float64), tri)


_PLY_TYPES = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2",
    "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4",
    "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}


def _load_ply(path: Path) -> TriangleMesh:
    data = path.read_bytes()
    end = data.find(b"end_header\n")
    if not data.startswith(b"ply") or end < 0:
        raise MeshParseError(path, 0, "not a PLY file")
    header_lines = data[:end].decode("ascii", errors="replace").splitlines()
    offset = end + len(b"end_header\n")

    elements: list = []  # (name, count, [(prop_name, dtype | ('list', count_dt, item_dt))])
    fmt = None
    for lineno, line in enumerate(header_lines, start=1):
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "format":
            fmt = parts[1]
        elif parts[0] == "element":
            elements.append((parts[1], int(parts[2]), []))
        elif parts[0] == "property":
            if not elements:
                raise MeshParseError(path, lineno, "property before element")
            if parts[1] == "list":
                elements[-1][2].append((parts[4], ("list", _PLY_TYPES[parts[2]], _PLY_TYPES[parts[3]])))
            else:
                elements[-1][2].append((parts[2], _PLY_TYPES[parts[1]]))
    if fmt != "binary_little_endian":
        raise MeshParseError(path, 0, f"unsupported PLY format: {fmt}")

    vertex_data = None
    faces: list = []
    for name, count, props in elements:
        if all(not isinstance(dt, tuple) for _, dt in props):
            dtype = np.dtype([(pname, "<" + dt) for pname, dt in props])
            nbytes = dtype.itemsize * count
            if offset + nbytes > len(data):
                raise MeshParseError(path, offset, f"truncated element '{name}': "
                                     f"expected {nbytes} bytes, have {len(data) - offset}")
            block = np.frombuffer(data, dtype=dtype, count=count, offset=offset)
            offset += nbytes
            if name == "vertex":
                vertex_data = block
        else:
            for i in range(count):
                row: dict = {}
                for pname, dt in props:
                    if isinstance(dt, tuple):
                        _, cnt_dt, item_dt = dt
                        cnt_size = np.dtype(cnt_dt).itemsize
                        if offset + cnt_size > len(data):
                            raise MeshParseError(path, offset, f"truncated list in '{name}'")
                        n = int(np.frombuffer(data, dtype="<" + cnt_dt, count=1, offset=offset)[0])
                        offset += cnt_size
                        item_size = np.dtype(item_dt).itemsize
                        if offset + n * item_size > len(data):
                            raise MeshParseError(path, offset, f"truncated list in '{name}'")
                        row[pname] = np.frombuffer(data, dtype="<" + item_dt, count=n, offset=offset)
                        offset += n * item_size
                    else:
                        size = np.dtype(dt).itemsize
                        row[pname] = np.frombuffer(data, dtype="<" + dt, count=1, offset=offset)[0]
                        offset += size
                if name == "face":
                    idx = row.get("vertex_indices", row.get("vertex_index"))
                    if idx is not None:
                        for k in range(1, len(idx) - 1):
                            faces.append((idx[0], idx[k], idx[k + 1]))

    if vertex_data is None:
        raise MeshParseError(path, 0, "no vertex element")
    names = vertex_data.dtype.names
    for req in ("x", "y", "z"):
        if req not in names:
            raise MeshParseError(path, 0, f"vertex element missing property '{req}'")
    vcount = len(vertex_data)
    positions = np.stack([vertex_data[c].astype(np.float64) for c in "xyz"], axis=1)
    normals = None
    if all(c in names for c in ("nx", "ny", "nz")):
        normals = np.stack([vertex_data[c].astype(np.float64) for c in ("nx", "ny", "nz")], axis=1)
    colors = None
    if all(c in names for c in ("red", "green", "blue")):
        rgb = np.stack([vertex_data[c].astype(np.float64) for c in ("red", "green", "blue")], axis=1)
        if vertex_data.dtype["red"] == np.uint8:
            rgb /= 255.0
        alpha = np.ones((vcount, 1))
        if "alpha" in names:
            a = vertex_data["alpha"].astype(np.float64)
            if vertex_data.dtype["alpha"] == np.uint8:
                a /= 255.0
            alpha = a[:, None]
        colors = np.concatenate([rgb, alpha], axis=1)

    tri = np.array(faces, dtype=np.int32).reshape(-1, 3)
    if len(tri) and (tri.min() < 0 or tri.max() >= vcount):
        raise MeshParseError(path, 0, f"face index out of range (have {vcount} vertices)")
    return TriangleMesh(positions, normals, colors, tri)


def save_mesh_ply(mesh: TriangleMesh, path) -> None:
    """Binary little-endian PLY with x,y,z,nx,ny,nz,red,green,blue,alpha."""
    path = Path(path)
    vcount, tcount = len(mesh.positions), len(mesh.triangles)
    header = (
        "ply\nformat binary_little_endian 1.0\n"
        f"element vertex {vcount}\n"
        "property float x\nproperty float y\nproperty float z\n"
        "property float nx\nproperty float ny\nproperty float nz\n"
        "property uchar red\nproperty uchar green\nproperty uchar blue\nproperty uchar alpha\n"
        f"element face {tcount}\n"
        "property list uchar int vertex_indices\n"
        "end_header\n"
    )
    vdtype = np.dtype([("x", "<f4"), ("y", "<f4"), ("z", "<f4"),
                       ("nx", "<f4"), ("ny", "<f4"), ("nz", "<f4"),
                       ("red", "u1"), ("green", "u1"), ("blue", "u1"), ("alpha", "u1")])
    verts = np.empty(vcount, dtype=vdtype)
    for i, c in enumerate("xyz"):
        verts[c] = mesh.positions[:, i].astype(np.float32)
    for i, c in enumerate(("nx", "ny", "nz")):
        verts[c] = mesh.normals[:, i].astype(np.float32)
    quant = np.clip(np.round(mesh.colors * 255.0), 0, 255).astype(np.uint8)
    for i, c in enumerate(("red", "green", "blue", "alpha")):
        verts[c] = quant[:, i]
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(verts.tobytes())
        for tri in mesh.triangles:
            fh.write(struct.pack("<BIII", 3, int(tri[0]), int(tri[1]), int(tri[2])))


# ---------------------------------------------------------------------------
# Loose octree

class _OctreeCell:
    __slots__ = ("center", "half", "depth", "children", "items")

    def __init__(self, center, half, depth):
        self.center = np.asarray(center, dtype=np.float64)
        self.half = float(half)
        self.depth = depth
        self.children: list | None = None
        self.items: list = []  # (AABB, payload)

    def loose_bounds(self, looseness: float) -> AABB:
        h = self.half * looseness
        return AABB(self.center - h, self.center + h)

    def tight_bounds(self) -> AABB:
        return AABB(self.center - self.half, self.center + self.half)


class LooseOctree:
    """Octree whose cells are enlarged by a looseness factor so items fit wholly in one cell."""

    def __init__(self, bounds: AABB, looseness: float = OCTREE_LOOSENESS,
                 max_items: int = OCTREE_MAX_ITEMS, max_depth: int = OCTREE_MAX_DEPTH):
        half = max(float(np.max(bounds.size)) * 0.5, 1e-9)
        self.root = _OctreeCell(bounds.center, half, 0)
        self.looseness = looseness
        self.max_items = max_items
        self.max_depth = max_depth
        self.count = 0

    def insert(self, bounds: AABB, payload) -> None:
        self._insert(self.root, bounds, payload)
        self.count += 1

    def _child_for(self, cell: _OctreeCell, bounds: AABB):
        octant = (np.asarray(bounds.center) >= cell.center).astype(int)
        idx = octant[0] * 4 + octant[1] * 2 + octant[2]
        if cell.children is None:
            cell.children = [None] * 8
        if cell.children[idx] is None:
            offset = (octant * 2 - 1) * (cell.half * 0.5)
            cell.children[idx] = _OctreeCell(cell.center + offset, cell.half * 0.5, cell.depth + 1)
        child = cell.children[idx]
        if child.loose_bounds(self.looseness).contains_box(bounds, tol=1e-12):
            return child
        return None

    def _insert(self, cell: _OctreeCell, bounds: AABB, payload) -> None:
        if cell.depth < self.max_depth and (cell.children is not None or len(cell.items) >= self.max_items):
            child = self._child_for(cell, bounds)
            if child is not None:
                self._insert(child, bounds, payload)
                return
            cell.items.append((bounds, payload))
            return
        cell.items.append((bounds, payload))
        if len(cell.items) > self.max_items and cell.depth < self.max_depth:
            staying = []
            for item in cell.items:
                child = self._child_for(cell, item[0])
                if child is not None:
                    self._insert(child, item[0], item[1])
                else:
                    staying.append(item)
            cell.items = staying

    def query(self, box: AABB) -> list:
        """Payloads of all items whose bounds intersect the box."""
        out: list = []
        stack = [self.root]
        while stack:
            cell = stack.pop()
            if not cell.loose_bounds(self.looseness).intersects(box):
                continue
            for item_bounds, payload in cell.items:
                if item_bounds.intersects(box):
                    out.append(payload)
            if cell.children is not None:
                stack.extend(c for c in cell.children if c is not None)
        return out

    def cells(self):
        stack = [self.root]
        while stack:
            cell = stack.pop()
            yield cell
            if cell.children is not None:
                stack.extend(c for c in cell.children if c is not None)


def build_spatial_structure(nodes: list[SceneNode]) -> SceneNode:
    """Organize a flat node list into a tree via a loose octree over world bounds."""
    if not nodes:
        raise ValueError("cannot build a spatial structure from an empty node list")
    for node in nodes:
        update_node_caches(node)
    if len(nodes) == 1:
        return nodes[0]

    total = AABB.empty()
    for node in nodes:
        total = total.union(node.bounds)
    tree = LooseOctree(total)
    for node in nodes:
        tree.insert(node.bounds, node)

    counter = [0]

    def convert(cell: _OctreeCell) -> SceneNode | None:
        child_nodes: list[SceneNode] = []
        if cell.children is not None:
            for c in cell.children:
                if c is None:
                    continue
                sub = convert(c)
                if sub is not None:
                    child_nodes.append(sub)
        child_nodes.extend(payload for _, payload in cell.items)
        if not child_nodes:
            return None
        if len(child_nodes) == 1:
            return child_nodes[0]
        counter[0] += 1
        inner = SceneNode(id=f"cell{counter[0]:04d}", children=child_nodes)
        inner.bounds = AABB.empty()
        for c in child_nodes:
            inner.bounds = inner.bounds.union(c.bounds)
        inner.triangle_count = sum(c.triangle_count for c in child_nodes)
        return inner

    root = convert(tree.root)
    assert root is not None
    return root


def gather_local_geometry(node: SceneNode, use_child_lods: bool = False):
    """Subtree geometry expressed in the node's local frame.

    Returns (meshes, clouds): meshes is a list of (positions, normals, colors,
    triangles); clouds is a list of (positions, normals, colors, disc_radius)
    for child subtrees replaced by their surfel approximation.
    """
    inv = np.linalg.inv(node.transform)
    meshes: list = []
    clouds: list = []

    def visit(n: SceneNode, allow_lod: bool):
        if allow_lod and use_child_lods and n.lod is not None and n.lod.count > 0:
            cloud = n.lod
            m = inv @ n.transform
            pos = transform_points(m, cloud.positions.astype(np.float64))
            nrm = transform_directions(m, cloud.normals.astype(np.float64))
            clouds.append((pos, nrm, cloud.colors_float(), cloud.full_prefix_spacing()))
            return
        if n.mesh is not None and n.mesh.triangle_count:
            m = inv @ n.transform
            pos = transform_points(m, n.mesh.positions)
            nrm = transform_directions(m, n.mesh.normals)
            meshes.append((pos, nrm, n.mesh.colors, n.mesh.triangles))
        for child in n.children:
            visit(child, True)

    visit(node, False)
    return meshes, clouds

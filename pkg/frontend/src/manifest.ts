/** Scene manifest loading.
 *
 * A scene directory holds manifest.json plus surfels/<id>.pbs files (and PLY
 * meshes, which this viewer does not rasterize). The manifest is a node tree:
 * row-major 4x4 local-to-world transforms, world-space bounds, triangle
 * counts, and per-LOD {file, count, p_m, r_m} references. */

import { invertAffine } from "./math3d.js";
import type { Bounds, Mat4 } from "./math3d.js";
import { parseSurfelFile } from "./pbs.js";
import type { SurfelCloud } from "./pbs.js";

export const MANIFEST_FORMAT = "bluesurfels-scene";

export interface LodRef {
    file: string;
    count: number;
    pM: number;
    rM: number;
}

export interface SceneNode {
    id: string;
    /** Local-to-world transform. Transforms are absolute per node, not
     * composed down the tree. */
    transform: Mat4;
    inverse: Mat4;
    bounds: Bounds | null; // world space
    triangleCount: number;
    meshFile: string | null;
    lodRef: LodRef | null;
    cloud: SurfelCloud | null; // filled in by loadScene
    children: SceneNode[];
}

interface ManifestNodeJson {
    id: string;
    transform: number[];
    bounds: number[] | null;
    triangle_count?: number;
    mesh?: string;
    lod?: { file: string; count: number; p_m: number; r_m: number };
    children?: ManifestNodeJson[];
}

export function parseManifest(json: unknown): SceneNode {
    const doc = json as { format?: string; version?: number; root?: ManifestNodeJson };
    if (doc.format !== MANIFEST_FORMAT) {
        throw new Error(`not a ${MANIFEST_FORMAT} manifest (format: ${doc.format})`);
    }
    if (doc.root === undefined) throw new Error("manifest has no root node");

    function decode(entry: ManifestNodeJson): SceneNode {
        if (!Array.isArray(entry.transform) || entry.transform.length !== 16) {
            throw new Error(`node ${entry.id}: transform must be 16 numbers`);
        }
        const transform = entry.transform.slice();
        const bounds = entry.bounds === null || entry.bounds === undefined
            ? null
            : (entry.bounds.slice(0, 6) as Bounds);
        return {
            id: entry.id,
            transform,
            inverse: invertAffine(transform),
            bounds,
            triangleCount: entry.triangle_count ?? 0,
            meshFile: entry.mesh ?? null,
            lodRef: entry.lod
                ? { file: entry.lod.file, count: entry.lod.count, pM: entry.lod.p_m, rM: entry.lod.r_m }
                : null,
            cloud: null,
            children: (entry.children ?? []).map(decode),
        };
    }

    return decode(doc.root);
}

export function walk(node: SceneNode): SceneNode[] {
    const out: SceneNode[] = [node];
    for (const child of node.children) out.push(...walk(child));
    return out;
}

/** Fetch-like accessor so tests can serve scenes from memory or disk. */
export type ResourceFetcher = (path: string) => Promise<ArrayBuffer>;

/** Load manifest.json and every referenced surfel file from a scene base URL
 * (e.g. "/scene"). */
export async function loadScene(baseUrl: string, fetcher?: ResourceFetcher): Promise<SceneNode> {
    const get = fetcher ?? (async (path: string) => {
        const response = await fetch(path);
        if (!response.ok) throw new Error(`${path}: HTTP ${response.status}`);
        return response.arrayBuffer();
    });
    const base = baseUrl.replace(/\/$/, "");
    const manifestBytes = await get(`${base}/manifest.json`);
    const root = parseManifest(JSON.parse(new TextDecoder().decode(manifestBytes)));
    await Promise.all(walk(root).map(async (node) => {
        if (node.lodRef !== null) {
            node.cloud = parseSurfelFile(await get(`${base}/${node.lodRef.file}`), node.lodRef.file);
        }
    }));
    return root;
}

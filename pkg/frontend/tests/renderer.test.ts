/** Renderer draw accounting on a stubbed GL context: exactly one draw call
 * per visible surfel cloud, buffers uploaded once, skips drawing nothing. */

import { describe, expect, it } from "vitest";

import { lookAtCamera } from "../src/camera.js";
import type { Bounds, Vec3 } from "../src/math3d.js";
import { SurfelRenderer } from "../src/renderer.js";
import { selectRenderActions } from "../src/selection.js";
import type { SceneNode } from "../src/manifest.js";
import { CountingGL, makeNode, makeTestCloud, translation } from "./helpers.js";

/** 10 x 10 grid of unit-cube LOD nodes under one grouping root. */
function gridScene(side = 10): SceneNode {
    const root = makeNode("root", translation(0, 0, 0), null);
    let bounds: Bounds | null = null;
    for (let i = 0; i < side; i++) {
        for (let j = 0; j < side; j++) {
            const x = i * 2;
            const z = j * 2;
            const node = makeNode(`cell-${i}-${j}`, translation(x, 0, z),
                                  [x, 0, z, x + 1, 1, z + 1], makeTestCloud(16, 8, 0.02));
            root.children.push(node);
            bounds = bounds === null
                ? node.bounds!.slice() as Bounds
                : [Math.min(bounds[0], x), 0, Math.min(bounds[2], z),
                   Math.max(bounds[3], x + 1), 1, Math.max(bounds[5], z + 1)];
        }
    }
    root.bounds = bounds;
    return root;
}

const overhead: Vec3 = [9.5, 100, 9.5];
const center: Vec3 = [9.5, 0, 9.5];

describe("SurfelRenderer", () => {
    it("issues exactly one draw call per visible cloud on a 100-node scene", () => {
        const gl = new CountingGL();
        const renderer = new SurfelRenderer(gl);
        const scene = gridScene(10);
        const camera = lookAtCamera(overhead, center, [0, 0, -1]);

        const actions = selectRenderActions(scene, camera);
        const cloudPrefixes = actions.filter((a) => a.action.kind === "surfels");
        expect(cloudPrefixes).toHaveLength(100);

        const stats = renderer.render(actions, camera);
        expect(stats.drawCalls).toBe(100);
        expect(stats.cloudsVisible).toBe(100);
        expect(gl.drawCalls).toHaveLength(100);
        for (const call of gl.drawCalls) {
            expect(call.mode).toBe(gl.POINTS);
            expect(call.first).toBe(0);
            expect(call.count).toBeGreaterThanOrEqual(1);
            expect(call.count).toBeLessThanOrEqual(16);
        }
        expect(stats.surfelsDrawn).toBe(gl.drawCalls.reduce((n, c) => n + c.count, 0));
    });

    it("uploads each cloud's buffer once across frames", () => {
        const gl = new CountingGL();
        const renderer = new SurfelRenderer(gl);
        const scene = gridScene(10);
        const camera = lookAtCamera(overhead, center, [0, 0, -1]);
        renderer.render(selectRenderActions(scene, camera), camera);
        expect(gl.bufferUploads).toBe(100);
        renderer.render(selectRenderActions(scene, camera), camera);
        expect(gl.bufferUploads).toBe(100);
        expect(gl.drawCalls).toHaveLength(200);
    });

    it("draws nothing when the scene is behind the camera", () => {
        const gl = new CountingGL();
        const renderer = new SurfelRenderer(gl);
        const scene = gridScene(10);
        const camera = lookAtCamera([9.5, 0.5, 200], [9.5, 0.5, 400]);
        const stats = renderer.render(selectRenderActions(scene, camera), camera);
        expect(stats.drawCalls).toBe(0);
        expect(gl.drawCalls).toHaveLength(0);
        expect(stats.nodesSkipped).toBe(1); // whole subtree rejected at the root
    });

    it("draws only the clouds inside a narrow frustum", () => {
        const gl = new CountingGL();
        const renderer = new SurfelRenderer(gl);
        const scene = gridScene(10);
        // Looking down one grid column with a low fov: distant columns fall
        // outside the view cone.
        const camera = lookAtCamera([0.5, 1, 45], [0.5, 1, 0], [0, 1, 0], [512, 512],
                                    (20 * Math.PI) / 180);
        const actions = selectRenderActions(scene, camera);
        const visible = actions.filter((a) => a.action.kind === "surfels").length;
        expect(visible).toBeGreaterThan(0);
        expect(visible).toBeLessThan(100);
        const stats = renderer.render(actions, camera);
        expect(stats.drawCalls).toBe(visible);
    });

    it("skips sub-pixel splats and empty prefixes", () => {
        const gl = new CountingGL();
        const renderer = new SurfelRenderer(gl);
        const node = gridScene(1).children[0];
        const camera = lookAtCamera(overhead, center, [0, 0, -1]);
        const stats = renderer.render([
            { node, action: { kind: "surfels", count: 4, size: 0.5, radius: 0.1 } },
            { node, action: { kind: "surfels", count: 0, size: 2, radius: 0.1 } },
        ], camera);
        expect(stats.drawCalls).toBe(0);
    });
});

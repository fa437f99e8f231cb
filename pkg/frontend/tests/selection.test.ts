/** Traversal behavior: frustum skips, prefix actions, saturation blending,
 * and foveated sizing on synthetic single-node scenes. */

import { describe, expect, it } from "vitest";

import { lookAtCamera } from "../src/camera.js";
import { makeBudgetController, makeFoveaZones } from "../src/formulas.js";
import { identityMat4 } from "../src/math3d.js";
import type { Bounds } from "../src/math3d.js";
import { selectRenderActions } from "../src/selection.js";
import { makeNode, makeTestCloud } from "./helpers.js";

const UNIT_BOUNDS: Bounds = [0, 0, 0, 1, 1, 1];

function lodNode(id = "n") {
    return makeNode(id, identityMat4(), UNIT_BOUNDS, makeTestCloud(16, 8, 0.1));
}

describe("selectRenderActions", () => {
    it("emits one surfel prefix for a distant visible LOD node", () => {
        const camera = lookAtCamera([0.5, 0.5, 50], [0.5, 0.5, 0]);
        const actions = selectRenderActions(lodNode(), camera);
        expect(actions).toHaveLength(1);
        const action = actions[0].action;
        expect(action.kind).toBe("surfels");
        if (action.kind === "surfels") {
            expect(action.count).toBeGreaterThanOrEqual(1);
            expect(action.count).toBeLessThanOrEqual(16);
            expect(action.radius).toBeGreaterThan(0);
            expect(action.size).toBe(2);
        }
    });

    it("skips nodes behind the camera", () => {
        const camera = lookAtCamera([0.5, 0.5, 50], [0.5, 0.5, 100]);
        const actions = selectRenderActions(lodNode(), camera);
        expect(actions).toHaveLength(1);
        expect(actions[0].action.kind).toBe("skip");
    });

    it("blends when the cloud saturates up close", () => {
        const camera = lookAtCamera([0.5, 0.5, 2], [0.5, 0.5, 0]);
        const actions = selectRenderActions(lodNode(), camera);
        const blend = actions.find((a) => a.action.kind === "blend");
        expect(blend).toBeDefined();
    });

    it("blend weight is non-decreasing as the camera approaches", () => {
        let last = -1;
        for (const distance of [34, 31, 29, 27, 25]) {
            const camera = lookAtCamera([0.5, 0.5, distance], [0.5, 0.5, 0]);
            const actions = selectRenderActions(lodNode(), camera);
            const blend = actions.find((a) => a.action.kind === "blend");
            const alpha = blend !== undefined && blend.action.kind === "blend"
                ? blend.action.alpha : 0;
            expect(alpha).toBeGreaterThanOrEqual(last);
            last = alpha;
        }
        expect(last).toBeGreaterThan(0.9);
    });

    it("a peripheral node gets the outer foveation multiplier", () => {
        const zones = makeFoveaZones([256, 256], [[50, 1], [200, 4]]);
        const centered = lookAtCamera([0.5, 0.5, 50], [0.5, 0.5, 0]);
        const offCenter = lookAtCamera([24.5, 0.5, 50], [24.5, 0.5, 0]);
        const central = selectRenderActions(lodNode(), centered, { zones });
        const peripheral = selectRenderActions(lodNode(), offCenter, { zones });
        const sizeOf = (actions: ReturnType<typeof selectRenderActions>) => {
            const a = actions.find((x) => x.action.kind === "surfels")!.action;
            return a.kind === "surfels" ? a.size : NaN;
        };
        expect(sizeOf(central)).toBeCloseTo(2, 10);
        expect(sizeOf(peripheral)).toBeCloseTo(8, 10);
    });

    it("uses the controller's current size when one is passed", () => {
        const ctrl = makeBudgetController(16.6, 5.5);
        const camera = lookAtCamera([0.5, 0.5, 50], [0.5, 0.5, 0]);
        const actions = selectRenderActions(lodNode(), camera, { ctrl });
        const a = actions.find((x) => x.action.kind === "surfels")!.action;
        expect(a.kind === "surfels" && a.size).toBe(5.5);
    });

    it("descends through plain grouping nodes", () => {
        const group = makeNode("group", identityMat4(), UNIT_BOUNDS);
        group.children.push(lodNode("child"));
        const camera = lookAtCamera([0.5, 0.5, 50], [0.5, 0.5, 0]);
        const actions = selectRenderActions(group, camera);
        expect(actions).toHaveLength(1);
        expect(actions[0].node.id).toBe("child");
        expect(actions[0].action.kind).toBe("surfels");
    });
});

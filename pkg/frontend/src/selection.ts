/** Scene traversal turning a camera pose into per-node render actions.
 *
 * Visible LOD nodes whose cloud can cover at the computed radius are drawn as
 * a surfel prefix without descending. Saturated clouds blend: the parent
 * prefix is scaled by (1 - alpha) while children are rendered at weight
 * alpha, with alpha ramping on rMin/r - 1. */

import { outsideFrustum, project, projectedPixelDistance } from "./camera.js";
import type { Camera } from "./camera.js";
import {
    foveatedSize, makePrefixModel, minRadius, prefixForRadius, radiusForScreen,
} from "./formulas.js";
import type { BudgetController, FoveaZones } from "./formulas.js";
import { boundsCenter } from "./math3d.js";
import type { SceneNode } from "./manifest.js";

export const BLEND_BETA = 0.3; // width of the parent/child blend ramp in rMin/r - 1

export type RenderAction =
    | { kind: "surfels"; count: number; size: number; radius: number }
    | { kind: "geometry" }
    | { kind: "blend"; alpha: number }
    | { kind: "skip" };

export interface NodeAction {
    node: SceneNode;
    action: RenderAction;
}

export interface SelectOptions {
    ctrl?: BudgetController;
    zones?: FoveaZones;
    surfelSize?: number;
    asPrinted?: boolean;
}

function screenCenter(camera: Camera, node: SceneNode): [number, number] {
    const { x, y, depth } = project(camera, boundsCenter(node.bounds!));
    if (depth <= 0) return [camera.viewport[0] / 2, camera.viewport[1] / 2];
    return [x, y];
}

export function selectRenderActions(scene: SceneNode, camera: Camera,
                                    options: SelectOptions = {}): NodeAction[] {
    const baseSize = options.ctrl !== undefined ? options.ctrl.size : (options.surfelSize ?? 2.0);
    const asPrinted = options.asPrinted ?? false;
    const zones = options.zones;
    const actions: NodeAction[] = [];

    function visit(node: SceneNode, weight: number): void {
        if (outsideFrustum(camera, node.bounds)) {
            actions.push({ node, action: { kind: "skip" } });
            return;
        }
        const cloud = node.cloud;
        if (cloud !== null && cloud.count > 0 && cloud.rM > 0) {
            const model = makePrefixModel(Math.min(cloud.pM, cloud.count), cloud.rM, cloud.count);
            let s = baseSize;
            if (zones !== undefined) {
                s = foveatedSize(baseSize, screenCenter(camera, node), zones);
            }
            const dP = projectedPixelDistance(camera, node.bounds!, node.inverse);
            let r = 0;
            let saturated = true;
            let p = 0;
            if (dP > 0) {
                r = radiusForScreen(s, dP, asPrinted);
                ({ p, saturated } = prefixForRadius(model, r));
            }
            if (!saturated) {
                const count = Math.max(1, Math.floor(p * weight + 0.5));
                actions.push({ node, action: { kind: "surfels", count, size: s, radius: r } });
                return;
            }
            const alpha = r <= 0 ? 1
                : Math.min(Math.max((minRadius(model) / r - 1) / BLEND_BETA, 0), 1);
            actions.push({ node, action: { kind: "blend", alpha } });
            const parentCount = Math.floor((1 - alpha) * model.total * weight + 0.5);
            if (parentCount >= 1) {
                const radius = r > 0 ? r : minRadius(model);
                actions.push({ node, action: { kind: "surfels", count: parentCount, size: s, radius } });
            }
            if (node.meshFile !== null && node.triangleCount > 0 && alpha > 0) {
                actions.push({ node, action: { kind: "geometry" } });
            }
            for (const child of node.children) visit(child, weight * alpha);
            return;
        }
        if (node.meshFile !== null && node.triangleCount > 0) {
            actions.push({ node, action: { kind: "geometry" } });
        }
        for (const child of node.children) visit(child, weight);
    }

    visit(scene, 1.0);
    return actions;
}

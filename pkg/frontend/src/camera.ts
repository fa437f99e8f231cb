/** Pinhole camera and the projection math the selection traversal needs.
 * Camera space: x right, y up, z backward (view direction is -z); screen y
 * grows downward. */

import {
    add, cross, dot, normalize, scale, sub, transformPoint,
    boundsClosestPoint, boundsCorners,
} from "./math3d.js";
import type { Bounds, Mat4, Vec3 } from "./math3d.js";

export interface Camera {
    position: Vec3;
    /** Orthonormal camera axes in world space. */
    right: Vec3;
    up: Vec3;
    forward: Vec3; // view direction (-z axis of camera space)
    viewport: [number, number]; // width, height in pixels
    fovY: number; // radians
    near: number;
}

export function lookAtCamera(position: Vec3, target: Vec3, up: Vec3 = [0, 1, 0],
                             viewport: [number, number] = [512, 512],
                             fovY = (60 * Math.PI) / 180): Camera {
    if (viewport[0] < 1 || viewport[1] < 1) throw new Error("viewport must be positive");
    const forward = normalize(sub(target, position));
    let right = cross(forward, up);
    if (Math.hypot(right[0], right[1], right[2]) < 1e-9) {
        right = cross(forward, [0, 0, 1]);
    }
    right = normalize(right);
    const trueUp = cross(right, forward);
    return { position, right, up: trueUp, forward, viewport, fovY, near: 1e-3 };
}

export function aspect(camera: Camera): number {
    return camera.viewport[0] / camera.viewport[1];
}

/** World point -> camera space (x right, y up, z backward). */
export function toCamera(camera: Camera, p: Vec3): Vec3 {
    const d = sub(p, camera.position);
    return [dot(d, camera.right), dot(d, camera.up), -dot(d, camera.forward)];
}

/** Screen coordinates (pixels, y down) and positive-forward view depth. */
export function project(camera: Camera, p: Vec3): { x: number; y: number; depth: number } {
    const v = toCamera(camera, p);
    const depth = -v[2];
    const tanY = Math.tan(camera.fovY / 2);
    const safe = depth > 0 ? depth : 1;
    const xNdc = v[0] / (safe * tanY * aspect(camera));
    const yNdc = v[1] / (safe * tanY);
    return {
        x: (xNdc * 0.5 + 0.5) * camera.viewport[0],
        y: (0.5 - yNdc * 0.5) * camera.viewport[1],
        depth,
    };
}

/** World-space spacing of two adjacent pixels at the given view depth. */
export function pixelWorldSize(camera: Camera, depth: number): number {
    return (2 * depth * Math.tan(camera.fovY / 2)) / camera.viewport[1];
}

/** Spacing of two adjacent center pixels unprojected onto the plane through
 * the node's closest bounds point, expressed in the node's local frame. */
export function projectedPixelDistance(camera: Camera, bounds: Bounds, inverse: Mat4): number {
    const closest = boundsClosestPoint(bounds, camera.position);
    const t = Math.max(dot(sub(closest, camera.position), camera.forward), 0);
    const spacing = pixelWorldSize(camera, t);
    const q0 = add(camera.position, scale(camera.forward, t));
    const q1 = add(q0, scale(camera.right, spacing));
    const p0 = transformPoint(inverse, q0);
    const p1 = transformPoint(inverse, q1);
    return Math.hypot(p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2]);
}

/** Conservative frustum rejection on the box corners. */
export function outsideFrustum(camera: Camera, bounds: Bounds | null): boolean {
    if (bounds === null) return true;
    const tanY = Math.tan(camera.fovY / 2);
    const tanX = tanY * aspect(camera);
    let allBehind = true;
    let allLeft = true, allRight = true, allBelow = true, allAbove = true;
    for (const corner of boundsCorners(bounds)) {
        const v = toCamera(camera, corner);
        const depth = -v[2];
        if (depth > 0) allBehind = false;
        if (!(v[0] < -tanX * depth)) allLeft = false;
        if (!(v[0] > tanX * depth)) allRight = false;
        if (!(v[1] < -tanY * depth)) allBelow = false;
        if (!(v[1] > tanY * depth)) allAbove = false;
    }
    return allBehind || allLeft || allRight || allBelow || allAbove;
}

/** View-projection matrix (row-major) mapping world to clip space, for the
 * GPU path. Depth maps [near, far] to [-1, 1]. */
export function viewProjection(camera: Camera, far = 1e5): Mat4 {
    const { right: r, up: u, forward: f, position: e } = camera;
    const view: Mat4 = [
        r[0], r[1], r[2], -dot(r, e),
        u[0], u[1], u[2], -dot(u, e),
        -f[0], -f[1], -f[2], dot(f, e),
        0, 0, 0, 1,
    ];
    const tanY = Math.tan(camera.fovY / 2);
    const a = aspect(camera);
    const n = camera.near;
    const proj: Mat4 = [
        1 / (a * tanY), 0, 0, 0,
        0, 1 / tanY, 0, 0,
        0, 0, -(far + n) / (far - n), -(2 * far * n) / (far - n),
        0, 0, -1, 0,
    ];
    const out = new Array<number>(16).fill(0);
    for (let i = 0; i < 4; i++) {
        for (let j = 0; j < 4; j++) {
            let v = 0;
            for (let k = 0; k < 4; k++) v += proj[i * 4 + k] * view[k * 4 + j];
            out[i * 4 + j] = v;
        }
    }
    return out;
}

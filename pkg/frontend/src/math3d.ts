/** Minimal vector / 4x4 matrix / axis-aligned box helpers.
 *
 * Matrices are stored as 16 numbers in row-major order, matching the scene
 * manifest's transform encoding (local-to-world, applied as M * column). */

export type Vec3 = [number, number, number];
export type Mat4 = number[]; // length 16, row-major

export function vec3(x = 0, y = 0, z = 0): Vec3 {
    return [x, y, z];
}

export function add(a: Vec3, b: Vec3): Vec3 {
    return [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
}

export function sub(a: Vec3, b: Vec3): Vec3 {
    return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

export function scale(a: Vec3, s: number): Vec3 {
    return [a[0] * s, a[1] * s, a[2] * s];
}

export function dot(a: Vec3, b: Vec3): number {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

export function cross(a: Vec3, b: Vec3): Vec3 {
    return [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
}

export function length(a: Vec3): number {
    return Math.hypot(a[0], a[1], a[2]);
}

export function normalize(a: Vec3): Vec3 {
    const n = length(a);
    if (n === 0) throw new Error("cannot normalize a zero vector");
    return [a[0] / n, a[1] / n, a[2] / n];
}

export function identityMat4(): Mat4 {
    return [1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1];
}

export function mulMat4(a: Mat4, b: Mat4): Mat4 {
    const out = new Array<number>(16).fill(0);
    for (let r = 0; r < 4; r++) {
        for (let c = 0; c < 4; c++) {
            let v = 0;
            for (let k = 0; k < 4; k++) v += a[r * 4 + k] * b[k * 4 + c];
            out[r * 4 + c] = v;
        }
    }
    return out;
}

export function transformPoint(m: Mat4, p: Vec3): Vec3 {
    return [
        m[0] * p[0] + m[1] * p[1] + m[2] * p[2] + m[3],
        m[4] * p[0] + m[5] * p[1] + m[6] * p[2] + m[7],
        m[8] * p[0] + m[9] * p[1] + m[10] * p[2] + m[11],
    ];
}

/** Inverse of an affine transform (rotation/scale/shear + translation). */
export function invertAffine(m: Mat4): Mat4 {
    const a = m[0], b = m[1], c = m[2];
    const d = m[4], e = m[5], f = m[6];
    const g = m[8], h = m[9], i = m[10];
    const det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
    if (det === 0) throw new Error("singular transform");
    const ia = (e * i - f * h) / det;
    const ib = (c * h - b * i) / det;
    const ic = (b * f - c * e) / det;
    const id = (f * g - d * i) / det;
    const ie = (a * i - c * g) / det;
    const iff = (c * d - a * f) / det;
    const ig = (d * h - e * g) / det;
    const ih = (b * g - a * h) / det;
    const ii = (a * e - b * d) / det;
    const tx = m[3], ty = m[7], tz = m[11];
    return [
        ia, ib, ic, -(ia * tx + ib * ty + ic * tz),
        id, ie, iff, -(id * tx + ie * ty + iff * tz),
        ig, ih, ii, -(ig * tx + ih * ty + ii * tz),
        0, 0, 0, 1,
    ];
}

/** Row-major -> column-major Float32Array for WebGL uniformMatrix4fv. */
export function toGlMatrix(m: Mat4): Float32Array {
    const out = new Float32Array(16);
    for (let r = 0; r < 4; r++) {
        for (let c = 0; c < 4; c++) out[c * 4 + r] = m[r * 4 + c];
    }
    return out;
}

/** Axis-aligned box as [lox, loy, loz, hix, hiy, hiz]; null means empty. */
export type Bounds = [number, number, number, number, number, number];

export function boundsCenter(b: Bounds): Vec3 {
    return [(b[0] + b[3]) / 2, (b[1] + b[4]) / 2, (b[2] + b[5]) / 2];
}

export function boundsDiagonal(b: Bounds): number {
    return Math.hypot(b[3] - b[0], b[4] - b[1], b[5] - b[2]);
}

export function boundsClosestPoint(b: Bounds, p: Vec3): Vec3 {
    return [
        Math.min(Math.max(p[0], b[0]), b[3]),
        Math.min(Math.max(p[1], b[1]), b[4]),
        Math.min(Math.max(p[2], b[2]), b[5]),
    ];
}

export function boundsCorners(b: Bounds): Vec3[] {
    const out: Vec3[] = [];
    for (const x of [b[0], b[3]]) {
        for (const y of [b[1], b[4]]) {
            for (const z of [b[2], b[5]]) out.push([x, y, z]);
        }
    }
    return out;
}

export function boundsUnion(a: Bounds | null, b: Bounds | null): Bounds | null {
    if (a === null) return b;
    if (b === null) return a;
    return [
        Math.min(a[0], b[0]), Math.min(a[1], b[1]), Math.min(a[2], b[2]),
        Math.max(a[3], b[3]), Math.max(a[4], b[4]), Math.max(a[5], b[5]),
    ];
}

/** Parser for the binary surfel-cloud file format (PBS1).
 *
 * Layout (little-endian, packed):
 *   header, 76 bytes:
 *     0   char[4]  magic "PBS1"
 *     4   u32      version (1)
 *     8   u64      count
 *     16  u32      pM
 *     20  f64      rM
 *     28  f64[6]   bounds (lo xyz, hi xyz)
 *   then count records of 28 bytes each:
 *     0   f32[3]   position (node-local)
 *     12  f32[3]   normal
 *     24  u8[4]    color RGBA
 */

import type { Bounds } from "./math3d.js";

export const PBS_MAGIC = "PBS1";
export const PBS_VERSION = 1;
export const PBS_HEADER_SIZE = 76;
export const PBS_RECORD_SIZE = 28;

export interface SurfelCloud {
    count: number;
    pM: number;
    rM: number;
    bounds: Bounds;
    /** Interleaved records, PBS_RECORD_SIZE bytes per surfel, for direct
     * upload as a vertex buffer. */
    records: Uint8Array;
    positions: Float32Array; // 3 per surfel
    normals: Float32Array;   // 3 per surfel
    colors: Uint8Array;      // 4 per surfel
}

export class SurfelFileError extends Error {}

export function parseSurfelFile(buffer: ArrayBuffer, name = "<buffer>"): SurfelCloud {
    if (buffer.byteLength < PBS_HEADER_SIZE) {
        throw new SurfelFileError(
            `${name}: truncated header (expected ${PBS_HEADER_SIZE} bytes, got ${buffer.byteLength})`);
    }
    const view = new DataView(buffer);
    const magic = String.fromCharCode(
        view.getUint8(0), view.getUint8(1), view.getUint8(2), view.getUint8(3));
    if (magic !== PBS_MAGIC) {
        throw new SurfelFileError(`${name}: bad magic ${JSON.stringify(magic)}`);
    }
    const version = view.getUint32(4, true);
    if (version !== PBS_VERSION) {
        throw new SurfelFileError(`${name}: unsupported version ${version}`);
    }
    const countBig = view.getBigUint64(8, true);
    if (countBig > BigInt(Number.MAX_SAFE_INTEGER)) {
        throw new SurfelFileError(`${name}: implausible surfel count ${countBig}`);
    }
    const count = Number(countBig);
    const pM = view.getUint32(16, true);
    const rM = view.getFloat64(20, true);
    const bounds: Bounds = [0, 0, 0, 0, 0, 0];
    for (let i = 0; i < 6; i++) bounds[i] = view.getFloat64(28 + i * 8, true);

    const expected = PBS_HEADER_SIZE + count * PBS_RECORD_SIZE;
    if (buffer.byteLength !== expected) {
        throw new SurfelFileError(
            `${name}: payload size mismatch (expected ${expected} bytes, got ${buffer.byteLength})`);
    }

    const records = new Uint8Array(buffer, PBS_HEADER_SIZE);
    const positions = new Float32Array(count * 3);
    const normals = new Float32Array(count * 3);
    const colors = new Uint8Array(count * 4);
    for (let i = 0; i < count; i++) {
        const base = PBS_HEADER_SIZE + i * PBS_RECORD_SIZE;
        for (let k = 0; k < 3; k++) {
            positions[i * 3 + k] = view.getFloat32(base + k * 4, true);
            normals[i * 3 + k] = view.getFloat32(base + 12 + k * 4, true);
        }
        for (let k = 0; k < 4; k++) colors[i * 4 + k] = view.getUint8(base + 24 + k);
    }
    return { count, pM, rM, bounds, records, positions, normals, colors };
}

/** Serialize a cloud back to the binary layout (used by round-trip tests). */
export function encodeSurfelFile(cloud: SurfelCloud): ArrayBuffer {
    const buffer = new ArrayBuffer(PBS_HEADER_SIZE + cloud.count * PBS_RECORD_SIZE);
    const view = new DataView(buffer);
    for (let i = 0; i < 4; i++) view.setUint8(i, PBS_MAGIC.charCodeAt(i));
    view.setUint32(4, PBS_VERSION, true);
    view.setBigUint64(8, BigInt(cloud.count), true);
    view.setUint32(16, cloud.pM, true);
    view.setFloat64(20, cloud.rM, true);
    for (let i = 0; i < 6; i++) view.setFloat64(28 + i * 8, cloud.bounds[i], true);
    for (let i = 0; i < cloud.count; i++) {
        const base = PBS_HEADER_SIZE + i * PBS_RECORD_SIZE;
        for (let k = 0; k < 3; k++) {
            view.setFloat32(base + k * 4, cloud.positions[i * 3 + k], true);
            view.setFloat32(base + 12 + k * 4, cloud.normals[i * 3 + k], true);
        }
        for (let k = 0; k < 4; k++) view.setUint8(base + 24 + k, cloud.colors[i * 4 + k]);
    }
    return buffer;
}

/** Shared fixtures for the viewer tests: synthetic clouds, scene nodes, and a
 * counting WebGL stub. */

import { invertAffine } from "../src/math3d.js";
import type { Bounds, Mat4 } from "../src/math3d.js";
import { encodeSurfelFile, parseSurfelFile } from "../src/pbs.js";
import type { SurfelCloud } from "../src/pbs.js";
import type { SceneNode } from "../src/manifest.js";
import type { GLContext } from "../src/renderer.js";

/** Cloud of `count` surfels on a grid inside the unit cube, round-tripped
 * through the binary encoding so the interleaved records are populated. */
export function makeTestCloud(count: number, pM: number, rM: number): SurfelCloud {
    const positions = new Float32Array(count * 3);
    const normals = new Float32Array(count * 3);
    const colors = new Uint8Array(count * 4);
    const side = Math.ceil(Math.sqrt(count));
    for (let i = 0; i < count; i++) {
        positions[i * 3] = (i % side) / side;
        positions[i * 3 + 1] = Math.floor(i / side) / side;
        positions[i * 3 + 2] = 0.5;
        normals[i * 3 + 2] = 1;
        colors.set([200, 180, 160, 255], i * 4);
    }
    const proto: SurfelCloud = {
        count, pM, rM,
        bounds: [0, 0, 0.5, 1, 1, 0.5],
        records: new Uint8Array(0),
        positions, normals, colors,
    };
    return parseSurfelFile(encodeSurfelFile(proto));
}

export function translation(x: number, y: number, z: number): Mat4 {
    return [1, 0, 0, x, 0, 1, 0, y, 0, 0, 1, z, 0, 0, 0, 1];
}

export function makeNode(id: string, transform: Mat4, bounds: Bounds | null,
                         cloud: SurfelCloud | null = null): SceneNode {
    return {
        id,
        transform,
        inverse: invertAffine(transform),
        bounds,
        triangleCount: 0,
        meshFile: null,
        lodRef: cloud ? { file: `surfels/${id}.pbs`, count: cloud.count, pM: cloud.pM, rM: cloud.rM } : null,
        cloud,
        children: [],
    };
}

/** GL stub that satisfies the renderer's interface and counts calls. */
export class CountingGL implements GLContext {
    readonly ARRAY_BUFFER = 0x8892;
    readonly STATIC_DRAW = 0x88e4;
    readonly POINTS = 0x0000;
    readonly FLOAT = 0x1406;
    readonly UNSIGNED_BYTE = 0x1401;
    readonly DEPTH_TEST = 0x0b71;
    readonly COLOR_BUFFER_BIT = 0x4000;
    readonly DEPTH_BUFFER_BIT = 0x0100;
    readonly VERTEX_SHADER = 0x8b31;
    readonly FRAGMENT_SHADER = 0x8b30;
    readonly COMPILE_STATUS = 0x8b81;
    readonly LINK_STATUS = 0x8b82;

    drawCalls: { mode: number; first: number; count: number }[] = [];
    buffersCreated = 0;
    bufferUploads = 0;
    clears = 0;

    createBuffer(): object { this.buffersCreated += 1; return {}; }
    bindBuffer(): void {}
    bufferData(): void { this.bufferUploads += 1; }
    deleteBuffer(): void {}

    createShader(): object { return {}; }
    shaderSource(): void {}
    compileShader(): void {}
    getShaderParameter(): unknown { return true; }
    getShaderInfoLog(): string | null { return null; }
    createProgram(): object { return {}; }
    attachShader(): void {}
    linkProgram(): void {}
    getProgramParameter(): unknown { return true; }
    getProgramInfoLog(): string | null { return null; }
    useProgram(): void {}
    getAttribLocation(): number { return 0; }
    getUniformLocation(): object { return {}; }
    uniformMatrix4fv(): void {}
    uniform1f(): void {}
    uniform3f(): void {}

    enableVertexAttribArray(): void {}
    vertexAttribPointer(): void {}

    enable(): void {}
    clearColor(): void {}
    clear(): void { this.clears += 1; }
    viewport(): void {}
    drawArrays(mode: number, first: number, count: number): void {
        this.drawCalls.push({ mode, first, count });
    }
}

/** WebGL point-primitive renderer for surfel prefixes.
 *
 * Each surfel cloud lives in one interleaved vertex buffer (position f32x3,
 * normal f32x3, color u8x4 = 28 bytes); drawing a prefix is a single
 * drawArrays(POINTS, 0, count) call, so a frame issues exactly one draw call
 * per visible cloud. The GL dependency is expressed as the minimal interface
 * below so tests can substitute a counting stub. */

import { viewProjection } from "./camera.js";
import type { Camera } from "./camera.js";
import { mulMat4, toGlMatrix } from "./math3d.js";
import type { SceneNode } from "./manifest.js";
import type { NodeAction } from "./selection.js";

/** The subset of WebGLRenderingContext the renderer uses. */
export interface GLContext {
    readonly ARRAY_BUFFER: number;
    readonly STATIC_DRAW: number;
    readonly POINTS: number;
    readonly FLOAT: number;
    readonly UNSIGNED_BYTE: number;
    readonly DEPTH_TEST: number;
    readonly COLOR_BUFFER_BIT: number;
    readonly DEPTH_BUFFER_BIT: number;
    readonly VERTEX_SHADER: number;
    readonly FRAGMENT_SHADER: number;
    readonly COMPILE_STATUS: number;
    readonly LINK_STATUS: number;

    createBuffer(): object | null;
    bindBuffer(target: number, buffer: object | null): void;
    bufferData(target: number, data: ArrayBufferView, usage: number): void;
    deleteBuffer(buffer: object | null): void;

    createShader(type: number): object | null;
    shaderSource(shader: object, source: string): void;
    compileShader(shader: object): void;
    getShaderParameter(shader: object, pname: number): unknown;
    getShaderInfoLog(shader: object): string | null;
    createProgram(): object | null;
    attachShader(program: object, shader: object): void;
    linkProgram(program: object): void;
    getProgramParameter(program: object, pname: number): unknown;
    getProgramInfoLog(program: object): string | null;
    useProgram(program: object | null): void;
    getAttribLocation(program: object, name: string): number;
    getUniformLocation(program: object, name: string): object | null;
    uniformMatrix4fv(location: object | null, transpose: boolean, value: Float32Array): void;
    uniform1f(location: object | null, x: number): void;
    uniform3f(location: object | null, x: number, y: number, z: number): void;

    enableVertexAttribArray(index: number): void;
    vertexAttribPointer(index: number, size: number, type: number, normalized: boolean,
                        stride: number, offset: number): void;

    enable(cap: number): void;
    clearColor(r: number, g: number, b: number, a: number): void;
    clear(mask: number): void;
    viewport(x: number, y: number, width: number, height: number): void;
    drawArrays(mode: number, first: number, count: number): void;
}

const VERTEX_SHADER = `
attribute vec3 aPosition;
attribute vec3 aNormal;
attribute vec4 aColor;
uniform mat4 uModelViewProjection;
uniform float uPointSize;
varying vec3 vNormal;
varying vec4 vColor;
void main() {
    gl_Position = uModelViewProjection * vec4(aPosition, 1.0);
    gl_PointSize = uPointSize;
    vNormal = aNormal;
    vColor = aColor;
}
`;

const FRAGMENT_SHADER = `
precision mediump float;
uniform vec3 uLightDir;
varying vec3 vNormal;
varying vec4 vColor;
void main() {
    vec2 d = gl_PointCoord - vec2(0.5);
    if (dot(d, d) > 0.25) discard;
    float shade = 0.35 + 0.65 * abs(dot(normalize(vNormal), uLightDir));
    gl_FragColor = vec4(vColor.rgb * shade, vColor.a);
}
`;

export interface FrameStats {
    drawCalls: number;
    surfelsDrawn: number;
    cloudsVisible: number;
    nodesSkipped: number;
}

interface ProgramInfo {
    program: object;
    aPosition: number;
    aNormal: number;
    aColor: number;
    uMvp: object | null;
    uPointSize: object | null;
    uLightDir: object | null;
}

export class SurfelRenderer {
    private readonly gl: GLContext;
    private readonly info: ProgramInfo;
    private readonly buffers = new Map<SceneNode, object>();

    constructor(gl: GLContext) {
        this.gl = gl;
        this.info = this.buildProgram();
        gl.enable(gl.DEPTH_TEST);
        gl.clearColor(0.08, 0.09, 0.11, 1.0);
    }

    private compile(type: number, source: string): object {
        const gl = this.gl;
        const shader = gl.createShader(type);
        if (shader === null) throw new Error("createShader failed");
        gl.shaderSource(shader, source);
        gl.compileShader(shader);
        if (!gl.getShaderParameter(shader, gl.COMPILE_STATUS)) {
            throw new Error(`shader compile failed: ${gl.getShaderInfoLog(shader)}`);
        }
        return shader;
    }

    private buildProgram(): ProgramInfo {
        const gl = this.gl;
        const program = gl.createProgram();
        if (program === null) throw new Error("createProgram failed");
        gl.attachShader(program, this.compile(gl.VERTEX_SHADER, VERTEX_SHADER));
        gl.attachShader(program, this.compile(gl.FRAGMENT_SHADER, FRAGMENT_SHADER));
        gl.linkProgram(program);
        if (!gl.getProgramParameter(program, gl.LINK_STATUS)) {
            throw new Error(`program link failed: ${gl.getProgramInfoLog(program)}`);
        }
        return {
            program,
            aPosition: gl.getAttribLocation(program, "aPosition"),
            aNormal: gl.getAttribLocation(program, "aNormal"),
            aColor: gl.getAttribLocation(program, "aColor"),
            uMvp: gl.getUniformLocation(program, "uModelViewProjection"),
            uPointSize: gl.getUniformLocation(program, "uPointSize"),
            uLightDir: gl.getUniformLocation(program, "uLightDir"),
        };
    }

    /** Upload the cloud's interleaved records once; later frames reuse it. */
    private bufferFor(node: SceneNode): object {
        let buffer = this.buffers.get(node);
        if (buffer === undefined) {
            const gl = this.gl;
            buffer = gl.createBuffer() ?? undefined;
            if (buffer === undefined) throw new Error("createBuffer failed");
            gl.bindBuffer(gl.ARRAY_BUFFER, buffer);
            gl.bufferData(gl.ARRAY_BUFFER, node.cloud!.records, gl.STATIC_DRAW);
            this.buffers.set(node, buffer);
        }
        return buffer;
    }

    /** Draw one frame's actions; returns per-frame statistics. */
    render(actions: NodeAction[], camera: Camera): FrameStats {
        const gl = this.gl;
        const stats: FrameStats = { drawCalls: 0, surfelsDrawn: 0, cloudsVisible: 0, nodesSkipped: 0 };
        gl.viewport(0, 0, camera.viewport[0], camera.viewport[1]);
        gl.clear(gl.COLOR_BUFFER_BIT | gl.DEPTH_BUFFER_BIT);
        gl.useProgram(this.info.program);
        gl.uniform3f(this.info.uLightDir, camera.forward[0], camera.forward[1], camera.forward[2]);
        const vp = viewProjection(camera);

        for (const { node, action } of actions) {
            if (action.kind === "skip") {
                stats.nodesSkipped += 1;
                continue;
            }
            if (action.kind !== "surfels" || node.cloud === null) continue;
            const count = Math.min(action.count, node.cloud.count);
            if (count < 1 || action.size < 1) continue;

            gl.bindBuffer(gl.ARRAY_BUFFER, this.bufferFor(node));
            gl.enableVertexAttribArray(this.info.aPosition);
            gl.vertexAttribPointer(this.info.aPosition, 3, gl.FLOAT, false, 28, 0);
            gl.enableVertexAttribArray(this.info.aNormal);
            gl.vertexAttribPointer(this.info.aNormal, 3, gl.FLOAT, false, 28, 12);
            gl.enableVertexAttribArray(this.info.aColor);
            gl.vertexAttribPointer(this.info.aColor, 4, gl.UNSIGNED_BYTE, true, 28, 24);

            gl.uniformMatrix4fv(this.info.uMvp, false, toGlMatrix(mulMat4(vp, node.transform)));
            gl.uniform1f(this.info.uPointSize, action.size);
            gl.drawArrays(gl.POINTS, 0, count);
            stats.drawCalls += 1;
            stats.surfelsDrawn += count;
            stats.cloudsVisible += 1;
        }
        return stats;
    }

    dispose(): void {
        for (const buffer of this.buffers.values()) this.gl.deleteBuffer(buffer);
        this.buffers.clear();
    }
}

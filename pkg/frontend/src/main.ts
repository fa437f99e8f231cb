/** Browser entry point: load a scene over HTTP, fly around it, and render
 * surfel prefixes with the adaptive size controller and foveation zones.
 *
 * Controls: drag to look, WASD/QE to move, shift to go faster, F to toggle
 * foveation, C to toggle the adaptive controller. */

import { lookAtCamera } from "./camera.js";
import type { Camera } from "./camera.js";
import { budgetUpdate, makeBudgetController, makeFoveaZones } from "./formulas.js";
import { loadScene } from "./manifest.js";
import {
    add, boundsCenter, boundsDiagonal, cross, normalize, scale, sub,
} from "./math3d.js";
import type { Vec3 } from "./math3d.js";
import { SurfelRenderer } from "./renderer.js";
import type { GLContext } from "./renderer.js";
import { selectRenderActions } from "./selection.js";

const SCENE_URL = new URLSearchParams(location.search).get("scene") ?? "/scene";
const TARGET_FRAME_MS = 16.6;

interface FlyState {
    position: Vec3;
    yaw: number;   // radians around +y
    pitch: number;
    keys: Set<string>;
}

function flyCamera(state: FlyState, viewport: [number, number]): Camera {
    const cp = Math.cos(state.pitch);
    const forward: Vec3 = [
        Math.sin(state.yaw) * cp,
        Math.sin(state.pitch),
        -Math.cos(state.yaw) * cp,
    ];
    return lookAtCamera(state.position, add(state.position, forward), [0, 1, 0], viewport);
}

function stepFly(state: FlyState, camera: Camera, dtSeconds: number, speed: number): void {
    const boost = state.keys.has("shift") ? 4 : 1;
    const step = speed * boost * dtSeconds;
    const flat = normalize([camera.forward[0], 0, camera.forward[2]]);
    const right = normalize(cross(flat, [0, 1, 0]));
    let move: Vec3 = [0, 0, 0];
    if (state.keys.has("w")) move = add(move, flat);
    if (state.keys.has("s")) move = sub(move, flat);
    if (state.keys.has("d")) move = add(move, right);
    if (state.keys.has("a")) move = sub(move, right);
    if (state.keys.has("e")) move = add(move, [0, 1, 0]);
    if (state.keys.has("q")) move = sub(move, [0, 1, 0]);
    state.position = add(state.position, scale(move, step));
}

async function start(): Promise<void> {
    const canvas = document.getElementById("viewer") as HTMLCanvasElement;
    const hud = document.getElementById("hud") as HTMLElement;
    const gl = canvas.getContext("webgl") as (WebGLRenderingContext & GLContext) | null;
    if (gl === null) throw new Error("WebGL is not available");

    const scene = await loadScene(SCENE_URL);
    const renderer = new SurfelRenderer(gl);

    const center = scene.bounds !== null ? boundsCenter(scene.bounds) : ([0, 0, 0] as Vec3);
    const diagonal = scene.bounds !== null ? boundsDiagonal(scene.bounds) : 10;
    const state: FlyState = {
        position: add(center, [0, diagonal * 0.25, diagonal * 0.9]),
        yaw: 0,
        pitch: -0.25,
        keys: new Set(),
    };

    const ctrl = makeBudgetController(TARGET_FRAME_MS);
    let useController = true;
    let useFoveation = false;

    window.addEventListener("keydown", (e) => {
        const key = e.key.toLowerCase();
        if (key === "f") useFoveation = !useFoveation;
        else if (key === "c") useController = !useController;
        else state.keys.add(key);
    });
    window.addEventListener("keyup", (e) => state.keys.delete(e.key.toLowerCase()));
    let dragging = false;
    canvas.addEventListener("mousedown", () => { dragging = true; });
    window.addEventListener("mouseup", () => { dragging = false; });
    window.addEventListener("mousemove", (e) => {
        if (!dragging) return;
        state.yaw += e.movementX * 0.004;
        state.pitch = Math.min(Math.max(state.pitch - e.movementY * 0.004, -1.5), 1.5);
    });

    function resize(): void {
        canvas.width = window.innerWidth;
        canvas.height = window.innerHeight;
    }
    window.addEventListener("resize", resize);
    resize();

    let lastTime = performance.now();
    let fpsSmoothed = 60;

    function frame(now: number): void {
        const dt = Math.max(now - lastTime, 0.01);
        lastTime = now;
        fpsSmoothed = fpsSmoothed * 0.95 + (1000 / dt) * 0.05;

        const viewport: [number, number] = [canvas.width, canvas.height];
        const camera = flyCamera(state, viewport);
        stepFly(state, camera, dt / 1000, diagonal * 0.2);

        if (useController) budgetUpdate(ctrl, dt);
        const zones = useFoveation
            ? makeFoveaZones([viewport[0] / 2, viewport[1] / 2], [
                  [viewport[1] * 0.15, 1.0],
                  [viewport[1] * 0.45, 2.0],
                  [viewport[1] * 0.9, 4.0],
              ])
            : undefined;
        const actions = selectRenderActions(scene, camera, {
            ctrl: useController ? ctrl : undefined,
            zones,
            surfelSize: ctrl.size,
        });
        const stats = renderer.render(actions, camera);

        hud.textContent = [
            `fps ${fpsSmoothed.toFixed(0)}`,
            `surfels ${stats.surfelsDrawn}`,
            `draws ${stats.drawCalls}`,
            `size ${ctrl.size.toFixed(2)}px${useController ? "" : " (fixed)"}`,
            `foveation ${useFoveation ? "on" : "off"}`,
        ].join("  |  ");
        requestAnimationFrame(frame);
    }
    requestAnimationFrame(frame);
}

start().catch((err) => {
    const hud = document.getElementById("hud");
    if (hud !== null) hud.textContent = String(err);
    console.error(err);
});

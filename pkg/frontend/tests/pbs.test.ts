/** Binary surfel-file parsing: round-trips, a real generator-produced file,
 * and malformed-input errors. */

import { readFile } from "node:fs/promises";
import { describe, expect, it } from "vitest";

import {
    PBS_HEADER_SIZE, PBS_RECORD_SIZE, SurfelFileError,
    encodeSurfelFile, parseSurfelFile,
} from "../src/pbs.js";
import { makeTestCloud } from "./helpers.js";

async function loadFixture(rel: string): Promise<ArrayBuffer> {
    const buf = await readFile(new URL(rel, import.meta.url));
    return buf.buffer.slice(buf.byteOffset, buf.byteOffset + buf.byteLength);
}

describe("parseSurfelFile", () => {
    it("round-trips encode -> parse bit-exactly", () => {
        const cloud = makeTestCloud(37, 8, 0.125);
        const again = parseSurfelFile(encodeSurfelFile(cloud));
        expect(again.count).toBe(37);
        expect(again.pM).toBe(8);
        expect(again.rM).toBe(0.125);
        expect(Array.from(again.bounds)).toEqual(Array.from(cloud.bounds));
        expect(again.positions).toEqual(cloud.positions);
        expect(again.normals).toEqual(cloud.normals);
        expect(again.colors).toEqual(cloud.colors);
        expect(again.records).toEqual(cloud.records);
    });

    it("parses an empty cloud", () => {
        const cloud = parseSurfelFile(encodeSurfelFile(makeTestCloud(0, 2, 1)));
        expect(cloud.count).toBe(0);
        expect(cloud.positions.length).toBe(0);
    });

    it("parses a file written by the generator and agrees with the manifest", async () => {
        const manifest = JSON.parse(new TextDecoder().decode(
            await loadFixture("./fixtures/scene/manifest.json")));
        interface Entry { lod?: { file: string; count: number; p_m: number; r_m: number };
                          bounds: number[] | null; children?: Entry[] }
        const lodNodes: Entry[] = [];
        const collect = (e: Entry): void => {
            if (e.lod) lodNodes.push(e);
            (e.children ?? []).forEach(collect);
        };
        collect(manifest.root);
        expect(lodNodes.length).toBeGreaterThan(0);

        for (const entry of lodNodes) {
            const cloud = parseSurfelFile(await loadFixture(`./fixtures/scene/${entry.lod!.file}`));
            expect(cloud.count).toBe(entry.lod!.count);
            expect(cloud.pM).toBe(entry.lod!.p_m);
            expect(cloud.rM).toBe(entry.lod!.r_m);
            // Surfels live in the node's local frame; with the identity
            // transforms the generator uses for octree cells, the file bounds
            // sit inside the node's world bounds.
            for (let k = 0; k < 3; k++) {
                expect(cloud.bounds[k]).toBeGreaterThanOrEqual(entry.bounds![k] - 1e-5);
                expect(cloud.bounds[3 + k]).toBeLessThanOrEqual(entry.bounds![3 + k] + 1e-5);
            }
            for (let i = 0; i < cloud.count; i++) {
                for (let k = 0; k < 3; k++) {
                    const x = cloud.positions[i * 3 + k];
                    expect(x).toBeGreaterThanOrEqual(cloud.bounds[k] - 1e-6);
                    expect(x).toBeLessThanOrEqual(cloud.bounds[3 + k] + 1e-6);
                }
            }
        }
    });

    it("rejects a truncated header", () => {
        expect(() => parseSurfelFile(new ArrayBuffer(10))).toThrow(SurfelFileError);
        expect(() => parseSurfelFile(new ArrayBuffer(10))).toThrow("truncated header");
    });

    it("rejects a bad magic", () => {
        const buffer = encodeSurfelFile(makeTestCloud(1, 2, 1));
        new Uint8Array(buffer)[0] = 0x58;
        expect(() => parseSurfelFile(buffer)).toThrow("bad magic");
    });

    it("rejects an unsupported version", () => {
        const buffer = encodeSurfelFile(makeTestCloud(1, 2, 1));
        new DataView(buffer).setUint32(4, 9, true);
        expect(() => parseSurfelFile(buffer)).toThrow("unsupported version");
    });

    it("rejects a payload size mismatch", () => {
        const buffer = encodeSurfelFile(makeTestCloud(3, 2, 1));
        expect(() => parseSurfelFile(buffer.slice(0, buffer.byteLength - 1)))
            .toThrow("payload size mismatch");
    });

    it("uses the documented record layout", () => {
        expect(PBS_HEADER_SIZE).toBe(76);
        expect(PBS_RECORD_SIZE).toBe(28);
        const cloud = makeTestCloud(2, 2, 1);
        expect(encodeSurfelFile(cloud).byteLength).toBe(76 + 2 * 28);
        expect(cloud.records.byteLength).toBe(2 * 28);
    });
});

/** Runtime selection formulas: screen-space radius, prefix length, adaptive
 * surfel-size budget control, and foveation zones.
 *
 * These mirror the generator's Python implementation bit-for-bit where IEEE
 * semantics allow; parity is asserted against the exported test vectors. */

export interface PrefixModel {
    /** Prefix length at which the cloud's spacing was measured. */
    pM: number;
    /** Median nearest-neighbor distance of the first pM surfels. */
    rM: number;
    /** Total surfel count available in the cloud. */
    total: number;
}

export function makePrefixModel(pM: number, rM: number, total: number): PrefixModel {
    if (pM < 2) throw new Error("pM must be >= 2");
    if (rM <= 0) throw new Error("rM must be > 0");
    return { pM, rM, total };
}

/** Spacing when the full cloud is drawn; radii below this saturate. */
export function minRadius(model: PrefixModel): number {
    return model.rM * Math.sqrt(model.pM / model.total);
}

export interface PrefixResult {
    p: number;
    saturated: boolean;
}

/** Prefix length covering the surface at surfel radius r: pM * (rM/r)^2,
 * rounded half-up and clamped to [1, total]. Saturated means the cloud is
 * too small to cover at this radius. */
export function prefixForRadius(model: PrefixModel, r: number): PrefixResult {
    if (r <= 0) throw new Error("r must be > 0");
    const estimate = model.pM * (model.rM / r) ** 2;
    const rounded = Math.floor(estimate + 0.5);
    return { p: Math.min(Math.max(rounded, 1), model.total), saturated: rounded > model.total };
}

/** Object-space surfel radius for a desired on-screen size of s pixels.
 *
 * The dimensionally consistent reading (r grows with pixel footprint dP) is
 * the default; asPrinted selects the r = s / (2 dP) variant. */
export function radiusForScreen(s: number, dP: number, asPrinted = false): number {
    if (dP <= 0) throw new Error("dP must be > 0");
    return asPrinted ? s / (2 * dP) : (s * dP) / 2;
}

/** Adaptive surfel-size feedback: 3-frame moving average, deadband, clamp. */
export interface BudgetController {
    tTarget: number;      // ms per frame
    size: number;         // current surfel size, px
    sizeMin: number;
    sizeMax: number;
    deadband: [number, number];
    window: number[];     // last 3 sizes
}

export function makeBudgetController(tTarget: number, size = 4.0): BudgetController {
    return {
        tTarget,
        size,
        sizeMin: 1.0,
        sizeMax: 8.0,
        deadband: [0.9, 1.1],
        window: [size, size, size],
    };
}

/** Advance the controller by one frame; returns the new surfel size. */
export function budgetUpdate(ctrl: BudgetController, tFrame: number): number {
    if (tFrame <= 0) throw new Error("tFrame must be > 0");
    const ratio = tFrame / ctrl.tTarget;
    if (!(ctrl.deadband[0] <= ratio && ratio <= ctrl.deadband[1])) {
        const sOld = ctrl.window.reduce((a, b) => a + b, 0) / ctrl.window.length;
        const sNew = (sOld * 3 + sOld * ratio) / 4;
        ctrl.size = Math.min(Math.max(sNew, ctrl.sizeMin), ctrl.sizeMax);
    }
    ctrl.window.shift();
    ctrl.window.push(ctrl.size);
    return ctrl.size;
}

/** Concentric screen-space rings around a fovea center. The surfel-size
 * multiplier is defined at each ring radius and interpolated linearly between
 * rings; inside the first ring the innermost multiplier holds, beyond the
 * last the outermost one. */
export interface FoveaZones {
    center: [number, number];
    rings: [number, number][]; // (radiusPx, multiplier), radii increasing
}

export function makeFoveaZones(center: [number, number], rings: [number, number][]): FoveaZones {
    if (rings.length === 0) throw new Error("need at least one zone ring");
    for (let i = 1; i < rings.length; i++) {
        if (rings[i][0] <= rings[i - 1][0]) {
            throw new Error("ring radii must be strictly increasing");
        }
    }
    return { center, rings };
}

function interpClamped(x: number, xs: number[], ys: number[]): number {
    if (x <= xs[0]) return ys[0];
    const last = xs.length - 1;
    if (x >= xs[last]) return ys[last];
    let i = 1;
    while (xs[i] < x) i++;
    const t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] + t * (ys[i] - ys[i - 1]);
}

export function foveatedSize(s: number, screenCenter: [number, number], zones: FoveaZones): number {
    const dx = screenCenter[0] - zones.center[0];
    const dy = screenCenter[1] - zones.center[1];
    const d = Math.hypot(dx, dy);
    return s * interpClamped(d, zones.rings.map((r) => r[0]), zones.rings.map((r) => r[1]));
}

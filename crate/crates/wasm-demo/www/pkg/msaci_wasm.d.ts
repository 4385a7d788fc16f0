/* tslint:disable */
/* eslint-disable */

/**
 * Result of an online run, laid out as flat arrays for plotting.
 */
export class Simulation {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Observed value at each tick.
     */
    actual(): Float64Array;
    clamps(): number;
    /**
     * Step-major `[step][tick]` running `|error rate − target|`.
     */
    deviation(): Float64Array;
    /**
     * Step-major `[step][tick]` control inputs after each update.
     */
    eps(): Float64Array;
    error_rates(): Float64Array;
    horizon(): number;
    /**
     * Step-major `[step][tick]` lower bounds of the interval scored at that
     * tick; NaN before the step's first forecast is due.
     */
    lower(): Float64Array;
    mean_widths(): Float64Array;
    ticks(): number;
    upper(): Float64Array;
}

export function bound_curve(eps: number, gamma: number, t_max: number): Float64Array;

export function conformal_band(xs: Float64Array, ys: Float64Array, eps: number, ridge: number, x_lo: number, x_hi: number, points: number): Float64Array;

export function simulate(generator: string, steps: number, seed: number, horizon: number, eps: number, gamma: number): Simulation;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_simulation_free: (a: number, b: number) => void;
    readonly bound_curve: (a: number, b: number, c: number) => [number, number];
    readonly conformal_band: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number, number];
    readonly simulate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly simulation_actual: (a: number) => [number, number];
    readonly simulation_clamps: (a: number) => number;
    readonly simulation_deviation: (a: number) => [number, number];
    readonly simulation_eps: (a: number) => [number, number];
    readonly simulation_error_rates: (a: number) => [number, number];
    readonly simulation_horizon: (a: number) => number;
    readonly simulation_lower: (a: number) => [number, number];
    readonly simulation_mean_widths: (a: number) => [number, number];
    readonly simulation_ticks: (a: number) => number;
    readonly simulation_upper: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;

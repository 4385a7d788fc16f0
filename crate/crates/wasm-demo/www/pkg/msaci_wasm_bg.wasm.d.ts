/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_simulation_free: (a: number, b: number) => void;
export const bound_curve: (a: number, b: number, c: number) => [number, number];
export const conformal_band: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number, number];
export const simulate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
export const simulation_actual: (a: number) => [number, number];
export const simulation_clamps: (a: number) => number;
export const simulation_deviation: (a: number) => [number, number];
export const simulation_eps: (a: number) => [number, number];
export const simulation_error_rates: (a: number) => [number, number];
export const simulation_horizon: (a: number) => number;
export const simulation_lower: (a: number) => [number, number];
export const simulation_mean_widths: (a: number) => [number, number];
export const simulation_ticks: (a: number) => number;
export const simulation_upper: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;

/* tslint:disable */
/* eslint-disable */

/**
 * `count` interior points of `(0, π)`, avoiding the endpoints.
 */
export function angle_grid(count: number): Float64Array;

/**
 * `Ω_t(θ, η)` at `count` points `η` across `(-t, t)`; zero outside `(0, π)`.
 */
export function cone_weight_profile(alpha: number, beta: number, theta: number, t: number, count: number): Float64Array;

/**
 * `∂_t^M (δ^N | D^N) H_t(θ_i, φ)` along [`angle_grid`].
 */
export function kernel_curve(alpha: number, beta: number, m: number, n: number, interlaced: boolean, t: number, phi: number, count: number): Float64Array;

/**
 * Area integral and vertical square function of `f = Σ c_k 𝒫_k` along
 * [`angle_grid`], interleaved as `[S(θ_0), g(θ_0), S(θ_1), ...]`.
 */
export function square_functions(alpha: number, beta: number, m: number, n: number, interlaced: boolean, coeffs: Float64Array, count: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly angle_grid: (a: number) => [number, number];
    readonly cone_weight_profile: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly kernel_curve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly square_functions: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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

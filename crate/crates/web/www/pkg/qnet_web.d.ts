/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * `m x m` cell-centred grid of values, row by row from `y = 0`,
     * of the proxy (`proxy = true`) or the integrand.
     */
    grid(m: number, proxy: boolean): Float64Array;
    /**
     * Integral over `[x0, x1] x [y0, y1]` (corners in any order) as JSON.
     */
    integrate_box(x0: number, y0: number, x1: number, y1: number): string;
    /**
     * Line integral from `(x0, y0)` to `(x1, y1)` as JSON. The reference
     * is composite Gauss-Legendre on the integrand.
     */
    integrate_segment(x0: number, y0: number, x1: number, y1: number): string;
    /**
     * Samples an integrand of `family` (GM, GMD, HR or ZP) with `seed` and
     * fits a proxy on `n` scrambled Halton points. `k = 0` picks the
     * default neuron count.
     */
    constructor(family: string, seed: number, n: number, k: number);
    /**
     * JSON summary of the fit.
     */
    report(): string;
    /**
     * Weight file of the fitted proxy.
     */
    weights_json(): string;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_grid: (a: number, b: number, c: number) => [number, number];
    readonly demo_integrate_box: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly demo_integrate_segment: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly demo_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly demo_report: (a: number) => [number, number];
    readonly demo_weights_json: (a: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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

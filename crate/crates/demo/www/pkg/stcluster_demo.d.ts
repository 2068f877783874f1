/* tslint:disable */
/* eslint-disable */

/**
 * A simulated lattice dataset held on the Rust side.
 */
export class Simulation {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Fits the clustering model (`smoothing = true` adds the spatio-temporal
     * random effect) and returns the posterior median risk for every cell,
     * area-major.
     */
    fit(smoothing: boolean, burnin: number, keep: number, seed: bigint): Float64Array;
    /**
     * Simulates one replicate of `scenario` (1-5) on the default lattice.
     */
    constructor(scenario: number, e_low: number, e_high: number, seed: bigint);
    /**
     * Observed/expected ratio per area for `period`, row-major over the grid.
     */
    sir(period: number): Float64Array;
    /**
     * True relative risk per area for `period`.
     */
    trueRisk(period: number): Float64Array;
    readonly cols: number;
    readonly periods: number;
    readonly rows: number;
}

/**
 * Prior probabilities of the next class label given the previous one
 * (`prev = 0` for the first period).
 */
export function transitionProbs(prev: number, alpha: number, delta: number, g: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_simulation_free: (a: number, b: number) => void;
    readonly simulation_cols: (a: number) => number;
    readonly simulation_fit: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
    readonly simulation_new: (a: number, b: number, c: number, d: bigint) => [number, number, number];
    readonly simulation_periods: (a: number) => number;
    readonly simulation_rows: (a: number) => number;
    readonly simulation_sir: (a: number, b: number) => [number, number];
    readonly simulation_trueRisk: (a: number, b: number) => [number, number];
    readonly transitionProbs: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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

/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_simulation_free: (a: number, b: number) => void;
export const simulation_cols: (a: number) => number;
export const simulation_fit: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
export const simulation_new: (a: number, b: number, c: number, d: bigint) => [number, number, number];
export const simulation_periods: (a: number) => number;
export const simulation_rows: (a: number) => number;
export const simulation_sir: (a: number, b: number) => [number, number];
export const simulation_trueRisk: (a: number, b: number) => [number, number];
export const transitionProbs: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;

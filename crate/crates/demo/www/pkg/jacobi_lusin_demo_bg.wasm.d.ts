/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const angle_grid: (a: number) => [number, number];
export const cone_weight_profile: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const kernel_curve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
export const square_functions: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_start: () => void;

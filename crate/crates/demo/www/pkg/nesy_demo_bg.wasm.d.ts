/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_sceneimage_free: (a: number, b: number) => void;
export const learnRule: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
export const perceiveScene: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const renderScene: (a: number, b: number) => [number, number, number];
export const sceneimage_height: (a: number) => number;
export const sceneimage_json: (a: number) => [number, number];
export const sceneimage_rgba: (a: number) => [number, number];
export const sceneimage_width: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;

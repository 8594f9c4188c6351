/* tslint:disable */
/* eslint-disable */

export class SceneImage {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly height: number;
    /**
     * `{"facts": [...], "objects": [{"x", "y", "label"}]}` with normalized coordinates.
     */
    readonly json: string;
    /**
     * Pixels, RGBA row-major.
     */
    readonly rgba: Uint8Array;
    readonly width: number;
}

export function learnRule(rule: string, engine: string, profile: string, seed: number): string;

export function perceiveScene(seed: number, index: number, profile: string): string;

export function renderScene(seed: number, index: number): SceneImage;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_sceneimage_free: (a: number, b: number) => void;
    readonly learnRule: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly perceiveScene: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly renderScene: (a: number, b: number) => [number, number, number];
    readonly sceneimage_height: (a: number) => number;
    readonly sceneimage_json: (a: number) => [number, number];
    readonly sceneimage_rgba: (a: number) => [number, number];
    readonly sceneimage_width: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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

/* tslint:disable */
/* eslint-disable */

/**
 * SPSA on the LDD angles for `r` MCMs; returns the trace and exact reference fidelities as JSON.
 */
export function learn_ldd_json(r: number, iterations: number, shots: number, seed: bigint, kick: number, dephasing: number): string;

/**
 * Exact Bell fidelity against the number of MCMs for the fixed sequences, as SVG.
 */
export function mcm_sweep_svg(r_max: number, t1_us: number, t2_us: number, kick: number, dephasing: number): string;

/**
 * One idle window filled with a sequence, drawn as a single-qubit lane.
 */
export function timeline_svg(kind: string, window_dt: number, theta: number, phi: number, lambda: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly learn_ldd_json: (a: number, b: number, c: number, d: bigint, e: number, f: number) => [number, number, number, number];
    readonly mcm_sweep_svg: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly timeline_svg: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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

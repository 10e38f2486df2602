/* tslint:disable */
/* eslint-disable */

/**
 * Satellite antenna gain in dBi at `points` angles evenly spaced over `[0, max_deg]`.
 */
export function antenna_curve(hpbw_deg: number, floor_db: number, max_deg: number, points: number): Float64Array;

/**
 * Beam centres as flat `[x_km, y_km, color, statistics]` quadruples.
 */
export function beam_layout(reuse: number): Float64Array;

/**
 * Fading-free downlink SINR in dB on a `grid` x `grid` raster spanning
 * `[-half_km, half_km]` in both axes, row-major from the north-west corner.
 */
export function dl_sinr_map(reuse: number, two_antennas: boolean, scintillation: boolean, half_km: number, grid: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly antenna_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly beam_layout: (a: number) => [number, number, number, number];
    readonly dl_sinr_map: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
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

/* tslint:disable */
/* eslint-disable */

/**
 * A gridworld episode with a planner the caller drives by hand.
 */
export class GridDemo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Plans and acts once, skipping the per-iteration view.
     */
    act(): void;
    agent_x(): number;
    agent_y(): number;
    dead(): boolean;
    done(): boolean;
    /**
     * Runs one perturb / evaluate / recycle round. When the swarm has spent
     * its budget or horizon, the agent acts instead. Returns true if it acted.
     */
    iterate(): boolean;
    constructor(walkers: number, horizon: number, max_samples: bigint, seed: bigint);
    samples_used(): bigint;
    score(): number;
    steps(): number;
    /**
     * Walkers as a flat `[x, y, alive, ...]` list (alive is 0 or 1).
     */
    walkers(): Int32Array;
}

/**
 * Goal cell as `[x, y]`.
 */
export function grid_goal(): Int32Array;

/**
 * Grid edge length, for sizing the canvas.
 */
export function grid_size(): number;

/**
 * Dead cells as a flat `[x0, y0, x1, y1, ...]` list.
 */
export function grid_trap_cells(): Int32Array;

/**
 * Plays one point-navigator episode and returns the visited positions as
 * `[x0, y0, x1, y1, ...]`, starting at the start position.
 */
export function point_nav_episode(walkers: number, horizon: number, max_samples: bigint, seed: bigint): Float64Array;

/**
 * Point-navigator scene as `[goal_x, goal_y, goal_r, obstacle_x, obstacle_y, obstacle_r]`.
 */
export function point_nav_scene(): Float64Array;

export function relativize_curve(values: Float64Array): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_griddemo_free: (a: number, b: number) => void;
    readonly grid_goal: () => [number, number];
    readonly grid_size: () => number;
    readonly grid_trap_cells: () => [number, number];
    readonly griddemo_act: (a: number) => [number, number];
    readonly griddemo_agent_x: (a: number) => number;
    readonly griddemo_agent_y: (a: number) => number;
    readonly griddemo_dead: (a: number) => number;
    readonly griddemo_done: (a: number) => number;
    readonly griddemo_iterate: (a: number) => [number, number, number];
    readonly griddemo_new: (a: number, b: number, c: bigint, d: bigint) => [number, number, number];
    readonly griddemo_samples_used: (a: number) => bigint;
    readonly griddemo_score: (a: number) => number;
    readonly griddemo_steps: (a: number) => number;
    readonly griddemo_walkers: (a: number) => [number, number];
    readonly point_nav_episode: (a: number, b: number, c: bigint, d: bigint) => [number, number, number, number];
    readonly point_nav_scene: () => [number, number];
    readonly relativize_curve: (a: number, b: number) => [number, number];
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

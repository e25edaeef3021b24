/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_griddemo_free: (a: number, b: number) => void;
export const grid_goal: () => [number, number];
export const grid_size: () => number;
export const grid_trap_cells: () => [number, number];
export const griddemo_act: (a: number) => [number, number];
export const griddemo_agent_x: (a: number) => number;
export const griddemo_agent_y: (a: number) => number;
export const griddemo_dead: (a: number) => number;
export const griddemo_done: (a: number) => number;
export const griddemo_iterate: (a: number) => [number, number, number];
export const griddemo_new: (a: number, b: number, c: bigint, d: bigint) => [number, number, number];
export const griddemo_samples_used: (a: number) => bigint;
export const griddemo_score: (a: number) => number;
export const griddemo_steps: (a: number) => number;
export const griddemo_walkers: (a: number) => [number, number];
export const point_nav_episode: (a: number, b: number, c: bigint, d: bigint) => [number, number, number, number];
export const point_nav_scene: () => [number, number];
export const relativize_curve: (a: number, b: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_start: () => void;

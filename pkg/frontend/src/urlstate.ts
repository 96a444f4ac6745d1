// Scenario state lives in the URL fragment so a what-if view is shareable:
//   #seed=42&avg=0&s/scenario.total_intensity=2.5

export interface UiState {
  overrides: Record<string, number>;
  seed?: number;
  averaged: boolean;
  downsample: number;
}

export const DEFAULT_STATE: UiState = { overrides: {}, averaged: true, downsample: 1 };

const OVERRIDE_PREFIX = "s/";

export function encodeState(state: UiState): string {
  const params = new URLSearchParams();
  if (state.seed !== undefined) params.set("seed", String(state.seed));
  if (!state.averaged) params.set("avg", "0");
  if (state.downsample !== 1) params.set("ds", String(state.downsample));
  for (const [path, value] of Object.entries(state.overrides)) {
    params.set(OVERRIDE_PREFIX + path, String(value));
  }
  return params.toString();
}

export function decodeState(fragment: string): UiState {
  const state: UiState = { ...DEFAULT_STATE, overrides: {} };
  const text = fragment.startsWith("#") ? fragment.slice(1) : fragment;
  if (!text) return state;
  const params = new URLSearchParams(text);
  for (const [key, raw] of params.entries()) {
    if (key === "seed") {
      const seed = Number(raw);
      if (Number.isInteger(seed) && seed >= 0) state.seed = seed;
    } else if (key === "avg") {
      state.averaged = raw !== "0";
    } else if (key === "ds") {
      const every = Number(raw);
      if (Number.isInteger(every) && every >= 1) state.downsample = every;
    } else if (key.startsWith(OVERRIDE_PREFIX)) {
      const value = Number(raw);
      if (Number.isFinite(value)) state.overrides[key.slice(OVERRIDE_PREFIX.length)] = value;
    }
  }
  return state;
}

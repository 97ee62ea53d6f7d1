/** View state with URL-fragment round-tripping for shareable sessions. */

export type Panel = "preview" | "compare" | "outliers";

export interface ViewState {
  basisId: string | null;
  modelIds: string[];
  sliders: number[]; // mm, clamped to parameter bounds
  colormapRange: [number, number]; // finite, lo < hi
  panel: Panel;
}

export const PARAM_BOUNDS: [number, number] = [-1, 1];

export function defaultState(paramCount: number): ViewState {
  return {
    basisId: null,
    modelIds: [],
    sliders: new Array(paramCount).fill(0),
    colormapRange: [-1, 1],
    panel: "preview",
  };
}

export function clampSliders(values: number[], bounds: [number, number] = PARAM_BOUNDS): number[] {
  return values.map((v) => {
    if (Number.isNaN(v)) return 0;
    return Math.min(bounds[1], Math.max(bounds[0], v));
  });
}

function normalizeRange(range: [number, number]): [number, number] {
  let [lo, hi] = range;
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) return [-1, 1];
  if (lo >= hi) return [lo, lo + 1];
  return [lo, hi];
}

/** Serialize into a URL fragment (no leading '#'). */
export function encodeState(state: ViewState): string {
  const parts = new URLSearchParams();
  if (state.basisId) parts.set("basis", state.basisId);
  if (state.modelIds.length) parts.set("models", state.modelIds.join(","));
  parts.set("sliders", state.sliders.map((v) => v.toPrecision(6)).join(","));
  parts.set("range", state.colormapRange.map((v) => v.toPrecision(6)).join(","));
  parts.set("panel", state.panel);
  return parts.toString();
}

export function decodeState(fragment: string, paramCount: number): ViewState {
  const state = defaultState(paramCount);
  const parts = new URLSearchParams(fragment.replace(/^#/, ""));

  const basis = parts.get("basis");
  if (basis) state.basisId = basis;
  const models = parts.get("models");
  if (models) state.modelIds = models.split(",").filter((m) => m.length > 0);

  const sliders = parts.get("sliders");
  if (sliders) {
    const parsed = sliders.split(",").map(Number);
    if (parsed.length === paramCount) state.sliders = clampSliders(parsed);
  }

  const range = parts.get("range");
  if (range) {
    const parsed = range.split(",").map(Number);
    if (parsed.length === 2) state.colormapRange = normalizeRange([parsed[0], parsed[1]]);
  }

  const panel = parts.get("panel");
  if (panel === "preview" || panel === "compare" || panel === "outliers") state.panel = panel;
  return state;
}

/** Fragments are stable: one encode/decode cycle reaches a fixed point, so
 *  shared URLs reproduce the exact same view. */
export function fragmentIsStable(state: ViewState, paramCount: number): boolean {
  const once = encodeState(state);
  const twice = encodeState(decodeState(once, paramCount));
  return once === twice;
}

/** Presentation model for the results pane; DOM-free so tests can drive it. */

import type { ComfortResponse, PredictResponse, Sector } from "./types.js";

export type Layer = "comfort" | "flow";

/** Comfort classes in server order with their fixed legend colors. */
export const COMFORT_LEGEND: ReadonlyArray<{ name: string; color: string }> = [
  { name: "sitting", color: "rgb(26,150,65)" },
  { name: "standing", color: "rgb(166,217,106)" },
  { name: "strolling", color: "rgb(255,255,191)" },
  { name: "business_walking", color: "rgb(253,174,97)" },
  { name: "uncomfortable", color: "rgb(215,25,28)" },
];

export const NODATA_LEGEND: ReadonlyArray<{ name: string; color: string }> = [
  { name: "building", color: "rgb(70,70,70)" },
  { name: "outside", color: "rgb(255,255,255)" },
];

export interface ResultState {
  layer: Layer;
  sector: Sector;
  comfort: ComfortResponse | null;
  flow: PredictResponse | null;
  lastInferenceMs: number | null;
  provenance: Record<string, unknown> | null;
  sceneVersionShown: number | null;
}

export function initialResultState(): ResultState {
  return {
    layer: "comfort",
    sector: "W",
    comfort: null,
    flow: null,
    lastInferenceMs: null,
    provenance: null,
    sceneVersionShown: null,
  };
}

export function applyComfort(
  state: ResultState,
  version: number,
  body: ComfortResponse,
): ResultState {
  return {
    ...state,
    layer: "comfort",
    comfort: body,
    lastInferenceMs: body.inference_ms,
    provenance: body.provenance,
    sceneVersionShown: version,
  };
}

export function applyFlow(
  state: ResultState,
  version: number,
  sector: Sector,
  body: PredictResponse,
): ResultState {
  return {
    ...state,
    layer: "flow",
    sector,
    flow: body,
    lastInferenceMs: body.inference_ms,
    sceneVersionShown: version,
  };
}

/** Histogram restricted to the five comfort classes, in legend order. */
export function classHistogram(body: ComfortResponse): Array<{ name: string; count: number }> {
  return COMFORT_LEGEND.map(({ name }) => ({
    name,
    count: body.histogram[name] ?? 0,
  }));
}

export function pngDataUrl(base64Png: string): string {
  return `data:image/png;base64,${base64Png}`;
}

/** Wire types shared with the prediction service. */

export type Point = [number, number];

export interface BuildingJson {
  polygon: Point[];
  height_m: number;
}

/** Scene payload exactly as POST /predict and POST /comfort accept it. */
export interface SceneJson {
  extent_m: number;
  buildings: BuildingJson[];
}

export const SECTORS = ["N", "NE", "E", "SE", "S", "SW", "W", "NW"] as const;
export type Sector = (typeof SECTORS)[number];

export interface WindRoseJson {
  sectors: Sector[];
  bin_edges_ms: number[];
  freq: number[][];
}

export interface CriteriaJson {
  thresholds_ms: number[];
  p_exc: number;
}

export interface PredictRequest {
  model: string;
  scene: SceneJson;
  direction_sector: Sector;
  size: number;
}

export interface PredictResponse {
  model: string;
  spec_hash: string;
  sector: Sector;
  flow_wgf: string;
  render_png: string;
  v_max: number;
  inference_ms: number;
}

export interface ComfortRequest {
  model: string;
  scene: SceneJson;
  windrose: WindRoseJson;
  criteria?: CriteriaJson;
  size: number;
}

export interface ComfortResponse {
  model: string;
  comfort_png: string;
  classes_wgf: string;
  histogram: Record<string, number>;
  provenance: Record<string, unknown>;
  inference_ms: number;
}

export interface HealthModel {
  name: string;
  spec_hash: string;
  kind: string;
}

export interface HealthResponse {
  status: string;
  models: HealthModel[];
  uptime_s: number;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

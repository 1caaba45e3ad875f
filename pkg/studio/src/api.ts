/**
 * Client for the prediction service.
 *
 * Staleness rule: every result carries the scene version it was requested
 * for; arrivals for any older version are dropped. At most one /comfort
 * request is in flight at a time - a newer run collapses onto the latest
 * scene version once the wire is free.
 */

import {
  ApiError,
  type ComfortRequest,
  type ComfortResponse,
  type HealthResponse,
  type PredictRequest,
  type PredictResponse,
  type SceneJson,
  type Sector,
  type WindRoseJson,
  type CriteriaJson,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface Versioned<T> {
  version: number;
  body: T;
}

async function postJson<T>(
  fetchFn: FetchLike,
  url: string,
  payload: unknown,
): Promise<T> {
  const response = await fetchFn(url, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(payload),
  });
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const parsed = (await response.json()) as { detail?: string };
      if (parsed.detail) detail = parsed.detail;
    } catch {
      /* non-JSON error body; keep the status text */
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  private predictCache = new Map<string, PredictResponse>();
  private comfortInFlight = false;

  constructor(
    public baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  async health(): Promise<HealthResponse> {
    const response = await this.fetchFn(`${this.baseUrl}/health`);
    if (!response.ok) throw new ApiError(response.status, response.statusText);
    return (await response.json()) as HealthResponse;
  }

  /** Cached per (scene version, sector, model): scrubbing sectors re-uses
   *  responses until the scene changes. */
  async predict(
    version: number,
    model: string,
    scene: SceneJson,
    sector: Sector,
    size = 256,
  ): Promise<Versioned<PredictResponse>> {
    const key = `${version}|${model}|${sector}|${size}`;
    const cached = this.predictCache.get(key);
    if (cached) return { version, body: cached };
    const payload: PredictRequest = {
      model,
      scene,
      direction_sector: sector,
      size,
    };
    const body = await postJson<PredictResponse>(
      this.fetchFn,
      `${this.baseUrl}/predict`,
      payload,
    );
    this.predictCache.set(key, body);
    return { version, body };
  }

  predictCacheSize(): number {
    return this.predictCache.size;
  }

  clearCache(): void {
    this.predictCache.clear();
  }

  get comfortBusy(): boolean {
    return this.comfortInFlight;
  }

  /**
   * Resolves null when the response is stale (the scene moved on while the
   * request was on the wire) or when another comfort request is in flight.
   */
  async comfort(
    version: number,
    currentVersion: () => number,
    model: string,
    scene: SceneJson,
    windrose: WindRoseJson,
    criteria: CriteriaJson | undefined,
    size = 256,
  ): Promise<Versioned<ComfortResponse> | null> {
    if (this.comfortInFlight) return null;
    this.comfortInFlight = true;
    try {
      const payload: ComfortRequest = { model, scene, windrose, size };
      if (criteria) payload.criteria = criteria;
      const body = await postJson<ComfortResponse>(
        this.fetchFn,
        `${this.baseUrl}/comfort`,
        payload,
      );
      if (currentVersion() !== version) return null; // stale: discard
      return { version, body };
    } finally {
      this.comfortInFlight = false;
    }
  }
}

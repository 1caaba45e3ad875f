/** Editor-side scene state: the single source for what gets serialized. */

import { clamp, polygonIsSimple } from "./geometry.js";
import type { Point, SceneJson } from "./types.js";

export interface EditorBuilding {
  polygon: Point[];
  heightM: number;
}

export interface ValidationIssue {
  building: number;
  reason: "self-intersection" | "too-few-vertices" | "out-of-extent" | "bad-height";
}

export const DEFAULT_EXTENT_M = 160;
export const DEFAULT_HEIGHT_M = 15;

/**
 * Mutable scene under edit. Every mutation bumps `version` (the staleness
 * token for in-flight requests) and sets `dirty` until results catch up.
 */
export class EditorScene {
  buildings: EditorBuilding[] = [];
  extentM = DEFAULT_EXTENT_M;
  version = 0;
  dirty = false;

  private bump(): void {
    this.version += 1;
    this.dirty = true;
  }

  markClean(version: number): void {
    if (version === this.version) this.dirty = false;
  }

  addBuilding(polygon: Point[], heightM = DEFAULT_HEIGHT_M): number {
    this.buildings.push({ polygon: polygon.map((p) => [...p] as Point), heightM });
    this.bump();
    return this.buildings.length - 1;
  }

  deleteBuilding(index: number): void {
    if (index < 0 || index >= this.buildings.length) return;
    this.buildings.splice(index, 1);
    this.bump();
  }

  addVertex(building: number, afterEdge: number, point: Point): void {
    const b = this.buildings[building];
    if (!b) return;
    b.polygon.splice(afterEdge + 1, 0, [...point] as Point);
    this.bump();
  }

  moveVertex(building: number, vertex: number, point: Point): void {
    const b = this.buildings[building];
    if (!b || !b.polygon[vertex]) return;
    b.polygon[vertex] = [
      clamp(point[0], 0, this.extentM),
      clamp(point[1], 0, this.extentM),
    ];
    this.bump();
  }

  deleteVertex(building: number, vertex: number): void {
    const b = this.buildings[building];
    if (!b) return;
    if (b.polygon.length <= 3) {
      // A polygon cannot drop below 3 vertices; remove the building instead.
      this.deleteBuilding(building);
      return;
    }
    b.polygon.splice(vertex, 1);
    this.bump();
  }

  setHeight(building: number, heightM: number): void {
    const b = this.buildings[building];
    if (!b) return;
    b.heightM = heightM;
    this.bump();
  }

  /** Client-side mirror of the server's scene invariants. */
  validate(): ValidationIssue[] {
    const issues: ValidationIssue[] = [];
    this.buildings.forEach((b, i) => {
      if (b.polygon.length < 3) {
        issues.push({ building: i, reason: "too-few-vertices" });
        return;
      }
      if (b.heightM <= 0) issues.push({ building: i, reason: "bad-height" });
      for (const [x, y] of b.polygon) {
        if (x < 0 || y < 0 || x > this.extentM || y > this.extentM) {
          issues.push({ building: i, reason: "out-of-extent" });
          break;
        }
      }
      if (!polygonIsSimple(b.polygon)) {
        issues.push({ building: i, reason: "self-intersection" });
      }
    });
    return issues;
  }

  isValid(): boolean {
    return this.validate().length === 0;
  }

  toJson(): SceneJson {
    return {
      extent_m: this.extentM,
      buildings: this.buildings.map((b) => ({
        polygon: b.polygon.map((p) => [p[0], p[1]] as Point),
        height_m: b.heightM,
      })),
    };
  }
}

/** Canonical serialization; the server accepts this string verbatim. */
export function serializeScene(scene: EditorScene): string {
  return JSON.stringify(scene.toJson(), null, 2) + "\n";
}

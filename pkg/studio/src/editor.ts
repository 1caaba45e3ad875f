/** Canvas rendering and pointer interaction for the footprint editor. */

import { hitVertex } from "./geometry.js";
import type { EditorScene } from "./scene.js";
import type { Point } from "./types.js";

const VERTEX_RADIUS_PX = 5;
const VERTEX_HIT_RADIUS_M = 6;

export interface EditorCallbacks {
  onEdit(): void;
  onSelect(building: number | null): void;
}

type DragState = { building: number; vertex: number } | null;

export class CanvasEditor {
  private drawing: Point[] = [];
  private drag: DragState = null;
  selected: number | null = null;
  overlayImage: HTMLImageElement | null = null;
  overlayOpacity = 0.75;
  mode: "select" | "draw" = "select";

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly scene: EditorScene,
    private readonly callbacks: EditorCallbacks,
  ) {
    canvas.addEventListener("pointerdown", (e) => this.pointerDown(e));
    canvas.addEventListener("pointermove", (e) => this.pointerMove(e));
    canvas.addEventListener("pointerup", () => this.pointerUp());
    canvas.addEventListener("dblclick", (e) => this.doubleClick(e));
  }

  private metersPerPixel(): number {
    return this.scene.extentM / this.canvas.width;
  }

  private toMeters(e: PointerEvent | MouseEvent): Point {
    const rect = this.canvas.getBoundingClientRect();
    const sx = this.canvas.width / rect.width;
    const sy = this.canvas.height / rect.height;
    return [
      (e.clientX - rect.left) * sx * this.metersPerPixel(),
      (e.clientY - rect.top) * sy * this.metersPerPixel(),
    ];
  }

  private toPixels(p: Point): Point {
    const m = this.metersPerPixel();
    return [p[0] / m, p[1] / m];
  }

  startDrawing(): void {
    this.mode = "draw";
    this.drawing = [];
  }

  finishDrawing(): void {
    if (this.drawing.length >= 3) {
      const index = this.scene.addBuilding(this.drawing);
      this.selected = index;
      this.callbacks.onSelect(index);
      this.callbacks.onEdit();
    }
    this.drawing = [];
    this.mode = "select";
    this.render();
  }

  private pointerDown(e: PointerEvent): void {
    const p = this.toMeters(e);
    if (this.mode === "draw") {
      this.drawing.push(p);
      this.render();
      return;
    }
    for (let bi = this.scene.buildings.length - 1; bi >= 0; bi--) {
      const poly = this.scene.buildings[bi]!.polygon;
      const vi = hitVertex(p, poly, VERTEX_HIT_RADIUS_M);
      if (vi >= 0) {
        if (e.altKey) {
          this.scene.deleteVertex(bi, vi);
          this.selected = bi < this.scene.buildings.length ? bi : null;
          this.callbacks.onSelect(this.selected);
          this.callbacks.onEdit();
          this.render();
          return;
        }
        this.drag = { building: bi, vertex: vi };
        this.selected = bi;
        this.callbacks.onSelect(bi);
        this.canvas.setPointerCapture(e.pointerId);
        return;
      }
    }
    this.selected = null;
    this.callbacks.onSelect(null);
    this.render();
  }

  private pointerMove(e: PointerEvent): void {
    if (!this.drag) return;
    this.scene.moveVertex(this.drag.building, this.drag.vertex, this.toMeters(e));
    this.render();
  }

  private pointerUp(): void {
    if (this.drag) {
      this.drag = null;
      this.callbacks.onEdit();
    }
  }

  private doubleClick(e: MouseEvent): void {
    if (this.mode === "draw") {
      e.preventDefault();
      this.finishDrawing();
    }
  }

  setOverlay(image: HTMLImageElement | null): void {
    this.overlayImage = image;
    this.render();
  }

  render(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = "#f6f8fa";
    ctx.fillRect(0, 0, width, height);

    if (this.overlayImage) {
      ctx.globalAlpha = this.overlayOpacity;
      ctx.imageSmoothingEnabled = false;
      ctx.drawImage(this.overlayImage, 0, 0, width, height);
      ctx.globalAlpha = 1.0;
    }

    const invalid = new Set(this.scene.validate().map((i) => i.building));
    this.scene.buildings.forEach((b, bi) => {
      ctx.beginPath();
      b.polygon.forEach((p, i) => {
        const [x, y] = this.toPixels(p);
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      });
      ctx.closePath();
      ctx.fillStyle = invalid.has(bi) ? "rgba(215,25,28,0.35)" : "rgba(40,60,90,0.45)";
      ctx.fill();
      ctx.lineWidth = bi === this.selected ? 3 : 1.5;
      ctx.strokeStyle = invalid.has(bi) ? "#d7191c" : bi === this.selected ? "#1565c0" : "#223";
      ctx.stroke();
      for (const p of b.polygon) {
        const [x, y] = this.toPixels(p);
        ctx.beginPath();
        ctx.arc(x, y, VERTEX_RADIUS_PX, 0, Math.PI * 2);
        ctx.fillStyle = "#fff";
        ctx.fill();
        ctx.strokeStyle = "#1565c0";
        ctx.stroke();
      }
    });

    if (this.drawing.length) {
      ctx.beginPath();
      this.drawing.forEach((p, i) => {
        const [x, y] = this.toPixels(p);
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      });
      ctx.strokeStyle = "#1565c0";
      ctx.setLineDash([6, 4]);
      ctx.stroke();
      ctx.setLineDash([]);
    }

    // Wind inlet cue: models expect wind from the left edge for sector W.
    ctx.fillStyle = "#888";
    ctx.font = "11px system-ui";
    ctx.fillText("wind inlet (W) ->", 8, height - 10);
  }
}

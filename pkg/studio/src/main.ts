/** App wiring: editor, sector scrub, comfort runs, debounce, toasts. */

import { ApiClient } from "./api.js";
import { CanvasEditor } from "./editor.js";
import {
  COMFORT_LEGEND,
  NODATA_LEGEND,
  applyComfort,
  applyFlow,
  classHistogram,
  initialResultState,
  pngDataUrl,
  type ResultState,
} from "./resultview.js";
import { ROSE_PRESETS } from "./roses.js";
import { EditorScene } from "./scene.js";
import { SECTORS, ApiError, type Sector } from "./types.js";

const DEBOUNCE_MS = 800;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function toast(message: string, kind: "error" | "info" = "error"): void {
  const host = el<HTMLDivElement>("toasts");
  const node = document.createElement("div");
  node.className = `toast ${kind}`;
  node.textContent = message;
  host.appendChild(node);
  setTimeout(() => node.remove(), 5000);
}

function renderLegend(): void {
  const host = el<HTMLDivElement>("legend");
  host.replaceChildren();
  for (const { name, color } of [...COMFORT_LEGEND, ...NODATA_LEGEND]) {
    const row = document.createElement("div");
    row.className = "legend-row";
    const swatch = document.createElement("span");
    swatch.className = "swatch";
    swatch.style.backgroundColor = color;
    const label = document.createElement("span");
    label.textContent = name.replace("_", " ");
    row.append(swatch, label);
    host.appendChild(row);
  }
}

async function loadImage(base64Png: string): Promise<HTMLImageElement> {
  const img = new Image();
  await new Promise<void>((resolve, reject) => {
    img.onload = () => resolve();
    img.onerror = () => reject(new Error("overlay PNG failed to decode"));
    img.src = pngDataUrl(base64Png);
  });
  return img;
}

function main(): void {
  const scene = new EditorScene();
  const api = new ApiClient(
    (document.body.dataset.apiBase ?? "http://127.0.0.1:8710").replace(/\/$/, ""),
  );
  let state: ResultState = initialResultState();
  let model = "";
  let debounceTimer: number | undefined;

  const canvas = el<HTMLCanvasElement>("editor");
  const status = el<HTMLSpanElement>("status");
  const heightSlider = el<HTMLInputElement>("height");
  const heightValue = el<HTMLSpanElement>("height-value");
  const roseSelect = el<HTMLSelectElement>("rose");
  const modelSelect = el<HTMLSelectElement>("model");
  const layerLabel = el<HTMLSpanElement>("layer-label");
  const inferenceLabel = el<HTMLSpanElement>("inference");

  const editor = new CanvasEditor(canvas, scene, {
    onEdit: () => {
      updateStatus();
      scheduleRun();
    },
    onSelect: (building) => {
      if (building !== null) {
        const b = scene.buildings[building];
        if (b) {
          heightSlider.value = String(b.heightM);
          heightValue.textContent = `${b.heightM} m`;
        }
      }
    },
  });

  function updateStatus(): void {
    const issues = scene.validate();
    if (issues.length) {
      status.textContent = `invalid: ${issues[0]!.reason}`;
      status.className = "bad";
    } else if (scene.dirty) {
      status.textContent = "edited - results out of date";
      status.className = "dirty";
    } else {
      status.textContent = "up to date";
      status.className = "ok";
    }
  }

  function renderResults(): void {
    layerLabel.textContent =
      state.layer === "comfort" ? "comfort map" : `flow - wind from ${state.sector}`;
    inferenceLabel.textContent =
      state.lastInferenceMs === null ? "" : `${state.lastInferenceMs.toFixed(0)} ms`;
    const hist = el<HTMLDivElement>("histogram");
    hist.replaceChildren();
    if (state.layer === "comfort" && state.comfort) {
      const rows = classHistogram(state.comfort);
      const max = Math.max(1, ...rows.map((r) => r.count));
      rows.forEach(({ name, count }, i) => {
        const row = document.createElement("div");
        row.className = "hist-row";
        const bar = document.createElement("div");
        bar.className = "hist-bar";
        bar.style.width = `${(100 * count) / max}%`;
        bar.style.backgroundColor = COMFORT_LEGEND[i]!.color;
        const label = document.createElement("span");
        label.textContent = `${name.replace("_", " ")}: ${count}`;
        row.append(bar, label);
        hist.appendChild(row);
      });
    }
  }

  async function runComfort(): Promise<void> {
    if (!model || !scene.isValid()) return;
    const version = scene.version;
    const rose = ROSE_PRESETS[roseSelect.value] ?? ROSE_PRESETS["uniform"]!;
    try {
      const result = await api.comfort(
        version,
        () => scene.version,
        model,
        scene.toJson(),
        rose,
        undefined,
      );
      if (!result) return; // stale or already busy
      state = applyComfort(state, result.version, result.body);
      scene.markClean(result.version);
      editor.setOverlay(await loadImage(result.body.comfort_png));
      renderResults();
      updateStatus();
    } catch (err) {
      toast(err instanceof ApiError ? err.message : `request failed: ${err}`);
    }
  }

  async function scrubSector(sector: Sector): Promise<void> {
    if (!model || !scene.isValid()) return;
    const version = scene.version;
    try {
      const result = await api.predict(version, model, scene.toJson(), sector);
      if (scene.version !== result.version) return; // stale
      state = applyFlow(state, result.version, sector, result.body);
      editor.setOverlay(await loadImage(result.body.render_png));
      renderResults();
    } catch (err) {
      toast(err instanceof ApiError ? err.message : `request failed: ${err}`);
    }
  }

  function scheduleRun(): void {
    window.clearTimeout(debounceTimer);
    debounceTimer = window.setTimeout(() => void runComfort(), DEBOUNCE_MS);
  }

  el<HTMLButtonElement>("draw").addEventListener("click", () => {
    editor.startDrawing();
    toast("click to add vertices, double-click to close the footprint", "info");
  });
  el<HTMLButtonElement>("finish").addEventListener("click", () => editor.finishDrawing());
  el<HTMLButtonElement>("delete").addEventListener("click", () => {
    if (editor.selected !== null) {
      scene.deleteBuilding(editor.selected);
      editor.selected = null;
      editor.render();
      updateStatus();
      scheduleRun();
    }
  });
  el<HTMLButtonElement>("run").addEventListener("click", () => void runComfort());
  heightSlider.addEventListener("input", () => {
    heightValue.textContent = `${heightSlider.value} m`;
    if (editor.selected !== null) {
      scene.setHeight(editor.selected, Number(heightSlider.value));
      updateStatus();
      scheduleRun();
    }
  });
  roseSelect.addEventListener("change", () => scheduleRun());
  modelSelect.addEventListener("change", () => {
    model = modelSelect.value;
    api.clearCache();
    scheduleRun();
  });

  const sectorHost = el<HTMLDivElement>("sectors");
  for (const sector of SECTORS) {
    const button = document.createElement("button");
    button.textContent = sector;
    button.addEventListener("click", () => void scrubSector(sector));
    sectorHost.appendChild(button);
  }

  for (const name of Object.keys(ROSE_PRESETS)) {
    const option = document.createElement("option");
    option.value = name;
    option.textContent = name;
    roseSelect.appendChild(option);
  }

  renderLegend();
  editor.render();
  updateStatus();

  void api
    .health()
    .then((health) => {
      modelSelect.replaceChildren();
      for (const m of health.models) {
        const option = document.createElement("option");
        option.value = m.name;
        option.textContent = `${m.name} (${m.kind}, ${m.spec_hash.slice(0, 8)})`;
        modelSelect.appendChild(option);
      }
      model = health.models[0]?.name ?? "";
    })
    .catch(() => toast(`service unreachable at ${api.baseUrl}`));
}

main();

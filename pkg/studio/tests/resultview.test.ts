import { describe, expect, it } from "vitest";

import {
  COMFORT_LEGEND,
  applyComfort,
  applyFlow,
  classHistogram,
  initialResultState,
  pngDataUrl,
} from "../src/resultview.js";
import { ROSE_PRESETS, roseTotalIsOne } from "../src/roses.js";

const COMFORT = {
  model: "desk",
  comfort_png: "AAAA",
  classes_wgf: "",
  histogram: {
    sitting: 100,
    standing: 20,
    strolling: 5,
    business_walking: 2,
    uncomfortable: 1,
    building: 30,
    outside: 0,
  },
  provenance: { spec_hash: "abc" },
  inference_ms: 42,
};

describe("legend", () => {
  it("carries exactly the five comfort classes in server order", () => {
    expect(COMFORT_LEGEND.map((c) => c.name)).toEqual([
      "sitting",
      "standing",
      "strolling",
      "business_walking",
      "uncomfortable",
    ]);
  });

  it("uses the server palette", () => {
    expect(COMFORT_LEGEND[0]!.color).toBe("rgb(26,150,65)");
    expect(COMFORT_LEGEND[4]!.color).toBe("rgb(215,25,28)");
  });
});

describe("result state", () => {
  it("comfort responses set layer, provenance, and timing", () => {
    const state = applyComfort(initialResultState(), 7, COMFORT);
    expect(state.layer).toBe("comfort");
    expect(state.sceneVersionShown).toBe(7);
    expect(state.lastInferenceMs).toBe(42);
    expect(state.provenance).toEqual({ spec_hash: "abc" });
  });

  it("flow responses switch the layer and remember the sector", () => {
    const state = applyFlow(initialResultState(), 3, "NE", {
      model: "desk",
      spec_hash: "abc",
      sector: "NE",
      flow_wgf: "",
      render_png: "BBBB",
      v_max: 9.5,
      inference_ms: 7,
    });
    expect(state.layer).toBe("flow");
    expect(state.sector).toBe("NE");
    expect(state.lastInferenceMs).toBe(7);
  });

  it("histogram rows follow legend order and fill gaps with zero", () => {
    const rows = classHistogram({ ...COMFORT, histogram: { sitting: 9 } });
    expect(rows.map((r) => r.name)).toEqual(COMFORT_LEGEND.map((c) => c.name));
    expect(rows[0]!.count).toBe(9);
    expect(rows[1]!.count).toBe(0);
  });

  it("encodes overlay PNGs as data urls", () => {
    expect(pngDataUrl("QUJD")).toBe("data:image/png;base64,QUJD");
  });
});

describe("rose presets", () => {
  it("every preset is normalized", () => {
    for (const rose of Object.values(ROSE_PRESETS)) {
      expect(roseTotalIsOne(rose)).toBe(true);
      expect(rose.sectors).toHaveLength(8);
    }
  });
});

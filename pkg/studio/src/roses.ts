/** Built-in wind rose presets (8 sectors, frequencies summing to 1). */

import { SECTORS, type WindRoseJson } from "./types.js";

function normalized(freq: number[][]): number[][] {
  const total = freq.flat().reduce((a, b) => a + b, 0);
  return freq.map((row) => row.map((v) => v / total));
}

export const ROSE_PRESETS: Record<string, WindRoseJson> = {
  uniform: {
    sectors: [...SECTORS],
    bin_edges_ms: [0.0, 3.0, 6.0, 10.0],
    freq: normalized(SECTORS.map(() => [1, 2, 2, 1])),
  },
  westerly: {
    sectors: [...SECTORS],
    bin_edges_ms: [0.0, 3.0, 6.0, 10.0],
    freq: normalized([
      [2, 1, 1, 0], // N
      [2, 1, 0, 0], // NE
      [2, 1, 0, 0], // E
      [2, 1, 1, 0], // SE
      [2, 2, 1, 0], // S
      [2, 4, 3, 1], // SW
      [2, 6, 5, 2], // W
      [2, 4, 2, 1], // NW
    ]),
  },
  calm: {
    sectors: [...SECTORS],
    bin_edges_ms: [0.0, 2.0],
    freq: normalized(SECTORS.map(() => [8, 1])),
  },
};

export function roseTotalIsOne(rose: WindRoseJson): boolean {
  const total = rose.freq.flat().reduce((a, b) => a + b, 0);
  return Math.abs(total - 1.0) <= 1e-6;
}

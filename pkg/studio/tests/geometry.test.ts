import { describe, expect, it } from "vitest";

import { clamp, hitVertex, pointInPolygon, polygonIsSimple } from "../src/geometry.js";
import type { Point } from "../src/types.js";

const square: Point[] = [
  [0, 0],
  [10, 0],
  [10, 10],
  [0, 10],
];

const bowtie: Point[] = [
  [0, 0],
  [10, 10],
  [10, 0],
  [0, 10],
];

describe("polygonIsSimple", () => {
  it("accepts a square", () => {
    expect(polygonIsSimple(square)).toBe(true);
  });

  it("rejects a bowtie", () => {
    expect(polygonIsSimple(bowtie)).toBe(false);
  });

  it("accepts a triangle", () => {
    expect(polygonIsSimple([[0, 0], [5, 0], [2, 4]])).toBe(true);
  });
});

describe("pointInPolygon", () => {
  it("center is inside", () => {
    expect(pointInPolygon(5, 5, square)).toBe(true);
  });

  it("outside point is outside", () => {
    expect(pointInPolygon(15, 5, square)).toBe(false);
  });
});

describe("hitVertex", () => {
  it("finds the nearest vertex within the radius", () => {
    expect(hitVertex([9.5, 0.2], square, 2)).toBe(1);
  });

  it("misses when everything is too far", () => {
    expect(hitVertex([5, 5], square, 2)).toBe(-1);
  });
});

describe("clamp", () => {
  it("bounds both sides", () => {
    expect(clamp(-3, 0, 10)).toBe(0);
    expect(clamp(13, 0, 10)).toBe(10);
    expect(clamp(4, 0, 10)).toBe(4);
  });
});

import { describe, expect, it } from "vitest";

import { analyzePlateau, isSmoothedTrapezoid } from "../src/shape.js";
import { fkLeg, HIPS } from "../src/fk.js";

function trapezoidTrace(): number[] {
  const rise = Array.from({ length: 20 }, (_, i) => (i / 20) ** 2 * (3 - 2 * (i / 20)));
  const cruise = Array.from({ length: 30 }, () => 1.0);
  const fall = [...rise].reverse();
  return [...rise, ...cruise, ...fall];
}

describe("plateau analysis", () => {
  it("accepts a smoothed trapezoid", () => {
    const trace = trapezoidTrace();
    const a = analyzePlateau(trace);
    expect(a.runs).toBe(1);
    expect(a.risesBefore).toBe(true);
    expect(a.fallsAfter).toBe(true);
    expect(isSmoothedTrapezoid(trace)).toBe(true);
  });

  it("rejects a double-humped trace", () => {
    const hump = trapezoidTrace();
    const doubled = [...hump, ...Array.from({ length: 10 }, () => 0.05), ...hump];
    expect(analyzePlateau(doubled).runs).toBe(2);
    expect(isSmoothedTrapezoid(doubled)).toBe(false);
  });

  it("rejects a spike with no plateau", () => {
    const spike = [0, 0.2, 0.5, 1.0, 0.5, 0.2, 0];
    expect(isSmoothedTrapezoid(spike, 0.3)).toBe(false);
  });

  it("handles empty and flat traces", () => {
    expect(isSmoothedTrapezoid([])).toBe(false);
    expect(isSmoothedTrapezoid([0, 0, 0])).toBe(false);
  });
});

describe("stick-figure FK", () => {
  it("zero pose hangs straight down from the hip", () => {
    const points = fkLeg(0, 0, 0, HIPS.fl);
    expect(points.foot[0]).toBeCloseTo(HIPS.fl[0], 12);
    expect(points.foot[1]).toBeCloseTo(HIPS.fl[1], 12);
    expect(points.foot[2]).toBeCloseTo(-0.2, 12);
  });

  it("link lengths are preserved", () => {
    const points = fkLeg(0.4, 1.1, -2.0, HIPS.hr);
    const femur = Math.hypot(
      points.knee[0] - points.hip[0], points.knee[1] - points.hip[1],
      points.knee[2] - points.hip[2]);
    const tibia = Math.hypot(
      points.foot[0] - points.knee[0], points.foot[1] - points.knee[1],
      points.foot[2] - points.knee[2]);
    expect(femur).toBeCloseTo(0.1, 12);
    expect(tibia).toBeCloseTo(0.1, 12);
  });
});

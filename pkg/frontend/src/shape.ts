/**
 * Shape checks on telemetry traces.
 *
 * The headline one: a speed trace of a cruise-limited move should look like
 * a smoothed trapezoid, i.e. a single contiguous run at the maximum with a
 * rise before it and a fall after it.
 */

export interface PlateauAnalysis {
  peak: number;
  /** number of disjoint runs at >= threshold * peak */
  runs: number;
  /** longest run's share of the whole series, 0..1 */
  plateauFraction: number;
  risesBefore: boolean;
  fallsAfter: boolean;
}

export function analyzePlateau(values: number[], threshold = 0.98): PlateauAnalysis {
  const speeds = values.map(Math.abs);
  const peak = Math.max(0, ...speeds);
  if (peak === 0 || speeds.length === 0) {
    return { peak: 0, runs: 0, plateauFraction: 0, risesBefore: false, fallsAfter: false };
  }
  const cut = threshold * peak;
  const runs: Array<[number, number]> = [];
  let start: number | null = null;
  speeds.forEach((v, i) => {
    if (v >= cut && start === null) start = i;
    if (v < cut && start !== null) {
      runs.push([start, i - 1]);
      start = null;
    }
  });
  if (start !== null) runs.push([start, speeds.length - 1]);
  let longest: [number, number] = runs[0];
  for (const run of runs) {
    if (run[1] - run[0] > longest[1] - longest[0]) longest = run;
  }
  return {
    peak,
    runs: runs.length,
    plateauFraction: (longest[1] - longest[0] + 1) / speeds.length,
    risesBefore: longest[0] > 0,
    fallsAfter: longest[1] < speeds.length - 1,
  };
}

/** True for a single-maximum plateau shape with rise and fall around it. */
export function isSmoothedTrapezoid(values: number[], minPlateauFraction = 0.1): boolean {
  const a = analyzePlateau(values);
  return a.runs === 1 && a.plateauFraction >= minPlateauFraction
    && a.risesBefore && a.fallsAfter;
}

// Pure series helpers shared by the chart panels and the comparison view.

import type { GroupSummary, MetricName, RunSummary } from "./types.js";
import { CLASS_NAMES, METRIC_NAMES } from "./types.js";

/** Mean of the last `window` samples at each index (fewer near the start). */
export function trailingAverage(series: number[], window: number): number[] {
  if (window <= 1) return series.slice();
  const out = new Array<number>(series.length);
  let sum = 0;
  for (let i = 0; i < series.length; i++) {
    sum += series[i];
    if (i >= window) sum -= series[i - window];
    out[i] = sum / Math.min(i + 1, window);
  }
  return out;
}

export function seriesExtent(all: number[][]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const series of all) {
    for (const value of series) {
      if (value < lo) lo = value;
      if (value > hi) hi = value;
    }
  }
  if (!Number.isFinite(lo)) return [0, 1];
  if (lo === hi) return [lo - 0.5, hi + 0.5];
  return [lo, hi];
}

export interface BandDelta {
  metric: MetricName;
  group: string;
  deltaLo: number;
  deltaHi: number;
}

export interface ComparisonSummary {
  deltaSlope: number;
  deltaIntercept: number;
  deltaRSquared: number;
  bands: BandDelta[];
}

/** B minus A, per the aggregate trend and every steady band. */
export function compareSummaries(a: RunSummary, b: RunSummary): ComparisonSummary {
  const bands: BandDelta[] = [];
  for (const metric of METRIC_NAMES) {
    for (const group of [...CLASS_NAMES, "aggregate"]) {
      const bandA = a.groups[group]?.bands[metric];
      const bandB = b.groups[group]?.bands[metric];
      if (!bandA || !bandB) continue;
      bands.push({
        metric,
        group,
        deltaLo: bandB[0] - bandA[0],
        deltaHi: bandB[1] - bandA[1],
      });
    }
  }
  const trendA = a.groups.aggregate.trend;
  const trendB = b.groups.aggregate.trend;
  return {
    deltaSlope: trendB.slope - trendA.slope,
    deltaIntercept: trendB.intercept - trendA.intercept,
    deltaRSquared: trendB.r_squared - trendA.r_squared,
    bands,
  };
}

export function formatNumber(value: number, digits = 4): string {
  if (value === 0) return "0";
  const magnitude = Math.abs(value);
  if (magnitude >= 10000 || magnitude < 0.001) return value.toExponential(2);
  return value.toFixed(digits).replace(/\.?0+$/, "");
}

export function describeTrend(group: GroupSummary): string {
  const { slope, intercept, r_squared } = group.trend;
  return `slope ${formatNumber(slope)} $/s · intercept ${formatNumber(intercept)} $ · R² ${r_squared.toFixed(4)}`;
}

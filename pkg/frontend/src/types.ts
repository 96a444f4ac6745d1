// Shapes of the scenario-service JSON bodies the console consumes.

export interface RangeInfo {
  min: number;
  max: number;
  step: number;
  default: number;
}

export interface DefaultsResponse {
  schema_version: number;
  scenario: Record<string, unknown>;
  reference_bands: Record<string, Record<string, [number, number]>> | null;
  ranges: Record<string, RangeInfo>;
}

export interface TrendSummary {
  slope: number;
  intercept: number;
  r_squared: number;
}

export interface GroupSummary {
  trend: TrendSummary;
  bands: Record<string, [number, number]>;
  steady_means: Record<string, number>;
  totals: Record<string, number>;
}

export interface RunSummary {
  settings: { window: number; tail_fraction: number; dt: number; seed: number };
  groups: Record<string, GroupSummary>;
}

export interface ClassSeries {
  arrivals: number[];
  browsing: number[];
  in_cart: number[];
  payers: number[];
  exit_no_purchase: number[];
  exit_abandoned_cart: number[];
  revenue: number[];
  cumulative_revenue: number[];
  buy_to_visit: number[];
  revenue_throughput: number[];
  potential_loss_throughput: number[];
}

export interface AggregateSeries {
  revenue: number[];
  cumulative_revenue: number[];
  buy_to_visit: number[];
  revenue_throughput: number[];
  potential_loss_throughput: number[];
}

export interface SimulateResponse {
  seed_used: number;
  run_millis: number;
  times: number[];
  classes: Record<string, ClassSeries>;
  aggregate: AggregateSeries;
  summary: RunSummary;
}

export interface FieldError {
  code: string;
  field: string;
  message: string;
}

export const CLASS_NAMES = ["tightwad", "average_spender", "spendthrift"] as const;
export type ClassName = (typeof CLASS_NAMES)[number];

export const METRIC_NAMES = [
  "buy_to_visit",
  "revenue_throughput",
  "potential_loss_throughput",
] as const;
export type MetricName = (typeof METRIC_NAMES)[number];

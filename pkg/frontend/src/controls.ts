// Slider model: specs come straight from /api/defaults so the console can
// never disagree with the service about a bound or a step.

import type { RangeInfo } from "./types.js";

export interface SliderSpec {
  path: string; // e.g. "scenario.behaviors.spendthrift.add_to_cart_rate"
  label: string;
  min: number;
  max: number;
  step: number;
  defaultValue: number;
}

const LABELS: Record<string, string> = {
  "scenario.total_intensity": "Global arrival intensity λ (shoppers/s)",
  "scenario.control1_pct": "Tightwad share, Control1 (%)",
  "scenario.control2_pct": "Average-spender split, Control2 (%)",
  "scenario.behaviors.tightwad.session_intensity": "Tightwad sessions λ1 (/s)",
  "scenario.behaviors.average_spender.session_intensity": "Avg-spender sessions λ2 (/s)",
  "scenario.behaviors.spendthrift.session_intensity": "Spendthrift sessions λ3 (/s)",
  "scenario.behaviors.tightwad.add_to_cart_rate": "Tightwad add-to-cart (%/s)",
  "scenario.behaviors.average_spender.add_to_cart_rate": "Avg-spender add-to-cart (%/s)",
  "scenario.behaviors.spendthrift.add_to_cart_rate": "Spendthrift add-to-cart (%/s)",
};

export function sliderSpecs(ranges: Record<string, RangeInfo>): SliderSpec[] {
  const order = Object.keys(LABELS);
  return Object.entries(ranges)
    .map(([path, info]) => ({
      path,
      label: LABELS[path] ?? path,
      min: info.min,
      max: info.max,
      step: info.step,
      defaultValue: info.default,
    }))
    .sort((a, b) => {
      const ia = order.indexOf(a.path);
      const ib = order.indexOf(b.path);
      return (ia === -1 ? order.length : ia) - (ib === -1 ? order.length : ib);
    });
}

/** Decimal places implied by a step like 0.001 (for display and rounding). */
export function stepDecimals(step: number): number {
  if (step <= 0) return 3;
  const text = step.toString();
  const dot = text.indexOf(".");
  return dot === -1 ? 0 : text.length - dot - 1;
}

/**
 * Clamp into [min, max] and snap onto the step grid anchored at min.
 * Snapped values are rounded to the step's precision so floating point
 * residue never leaks a value the service would reject.
 */
export function snapToStep(value: number, spec: Pick<SliderSpec, "min" | "max" | "step">): number {
  if (!Number.isFinite(value)) return spec.min;
  const clamped = Math.min(Math.max(value, spec.min), spec.max);
  if (spec.step <= 0) return clamped;
  const steps = Math.round((clamped - spec.min) / spec.step);
  const snapped = spec.min + steps * spec.step;
  const rounded = Number(snapped.toFixed(stepDecimals(spec.step)));
  return Math.min(Math.max(rounded, spec.min), spec.max);
}

/** Nest dotted slider paths into the scenario document the service expects. */
export function scenarioDocument(values: Record<string, number>): Record<string, unknown> {
  const document: Record<string, unknown> = { schema_version: 1, scenario: {} };
  for (const [path, value] of Object.entries(values)) {
    const keys = path.split(".");
    let node = document as Record<string, unknown>;
    for (const key of keys.slice(0, -1)) {
      if (typeof node[key] !== "object" || node[key] === null) node[key] = {};
      node = node[key] as Record<string, unknown>;
    }
    node[keys[keys.length - 1]] = value;
  }
  return document;
}

/** The slider whose path matches a service error field, if any. */
export function sliderForErrorField(field: string, specs: SliderSpec[]): SliderSpec | undefined {
  return specs.find((spec) => spec.path === field || spec.path.endsWith(field) || field.endsWith(spec.path));
}

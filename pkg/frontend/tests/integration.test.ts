// End-to-end checks against a real scenario service spawned for the test run.
// Exercises the same modules the browser console uses: the API client, the
// slider builder, and the comparison summary.

import { ChildProcess, spawn } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ServiceClient } from "../src/api.js";
import { scenarioDocument, sliderSpecs, snapToStep } from "../src/controls.js";
import { compareSummaries } from "../src/series.js";

const PORT = 8973;
const BASE = `http://127.0.0.1:${PORT}`;

let service: ChildProcess;
const client = new ServiceClient(BASE);

async function waitForHealth(timeoutMs = 20000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/api/health`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error("scenario service did not come up");
}

beforeAll(async () => {
  service = spawn("python3", ["-m", "stockflow.service", "--listen", `127.0.0.1:${PORT}`], {
    stdio: "ignore",
  });
  await waitForHealth();
}, 30000);

afterAll(() => {
  service?.kill();
});

describe("controls built from /api/defaults", () => {
  it("exactly match the published slider ranges and steps", async () => {
    const defaults = await client.defaults();
    const specs = sliderSpecs(defaults.ranges);
    expect(specs).toHaveLength(9);

    const byPath = Object.fromEntries(specs.map((s) => [s.path, s]));
    const expected: Record<string, [number, number, number, number]> = {
      "scenario.control1_pct": [0, 100, 0.001, 24.0],
      "scenario.control2_pct": [0, 100, 0.001, 80.263],
      "scenario.total_intensity": [0, 50, 0.1, 1.1],
      "scenario.behaviors.tightwad.session_intensity": [0, 50, 0.1, 5.5],
      "scenario.behaviors.average_spender.session_intensity": [0, 50, 0.1, 3.5],
      "scenario.behaviors.spendthrift.session_intensity": [0, 50, 0.1, 1.5],
      "scenario.behaviors.tightwad.add_to_cart_rate": [0, 10, 0.1, 5.0],
      "scenario.behaviors.average_spender.add_to_cart_rate": [10, 30, 0.1, 20.0],
      "scenario.behaviors.spendthrift.add_to_cart_rate": [30, 70, 0.1, 50.0],
    };
    for (const [path, [min, max, step, def]] of Object.entries(expected)) {
      const spec = byPath[path];
      expect(spec, path).toBeDefined();
      expect([spec.min, spec.max, spec.step, spec.defaultValue]).toEqual([min, max, step, def]);
    }
  });

  it("snapped slider values are never rejected by the service", async () => {
    const defaults = await client.defaults();
    const specs = sliderSpecs(defaults.ranges);
    const values: Record<string, number> = {};
    for (const spec of specs) {
      // worst case: snap a value thrown far outside the legal range
      values[spec.path] = snapToStep(spec.defaultValue * 3.7 + 11, spec);
    }
    const doc = scenarioDocument(values);
    (doc.scenario as Record<string, unknown>).sim = { horizon: 30.0 };
    const response = await client.simulate(doc, 1);
    expect(response.seed_used).toBe(1);
  });
});

describe("pinned seed", () => {
  it("re-running with the same seed renders identical chart data", async () => {
    const doc = { scenario: { sim: { horizon: 120.0 } } };
    const first = await client.simulate(doc, 4242);
    const second = await client.simulate(doc, 4242);
    expect(second.times).toEqual(first.times);
    expect(second.classes).toEqual(first.classes);
    expect(second.aggregate).toEqual(first.aggregate);
    expect(second.summary).toEqual(first.summary);
    expect(second.seed_used).toBe(4242);
  });

  it("downsampling changes the series but never the summary", async () => {
    const doc = { scenario: { sim: { horizon: 120.0 } } };
    const full = await client.simulate(doc, 7, 1);
    const thin = await client.simulate(doc, 7, 10);
    expect(thin.times.length).toBe(13);
    expect(full.times.length).toBe(121);
    expect(thin.summary).toEqual(full.summary);
  });
});

describe("price-doubling comparison", () => {
  it("doubles revenue and leaves buy-to-visit untouched", async () => {
    const seed = 99;
    const base = { scenario: { sim: { horizon: 240.0 } } };
    const doubled = {
      scenario: {
        sim: { horizon: 240.0 },
        catalog: {
          items: [
            { buy_probability: 0.3, price: 12.0 },
            { buy_probability: 0.1, price: 20.0 },
            { buy_probability: 0.6, price: 4.0 },
          ],
        },
      },
    };
    const runA = await client.simulate(base, seed);
    const runB = await client.simulate(doubled, seed);

    for (const name of ["tightwad", "average_spender", "spendthrift"] as const) {
      const revenueA = runA.classes[name].revenue;
      const revenueB = runB.classes[name].revenue;
      revenueA.forEach((value, i) => expect(revenueB[i]).toBe(value * 2));
      expect(runB.classes[name].buy_to_visit).toEqual(runA.classes[name].buy_to_visit);
    }

    const delta = compareSummaries(runA.summary, runB.summary);
    expect(delta.deltaSlope).toBeCloseTo(runA.summary.groups.aggregate.trend.slope, 9);
    for (const band of delta.bands.filter((b) => b.metric === "buy_to_visit")) {
      expect(band.deltaLo).toBe(0);
      expect(band.deltaHi).toBe(0);
    }
  });

  it("raising the spendthrift add-to-cart rate never loses payers at a fixed seed", async () => {
    const seed = 31;
    const lower = {
      scenario: { sim: { horizon: 240.0 }, behaviors: { spendthrift: { add_to_cart_rate: 40.0 } } },
    };
    const higher = {
      scenario: { sim: { horizon: 240.0 }, behaviors: { spendthrift: { add_to_cart_rate: 60.0 } } },
    };
    const runA = await client.simulate(lower, seed);
    const runB = await client.simulate(higher, seed);
    const total = (xs: number[]) => xs.reduce((a, b) => a + b, 0);
    expect(total(runB.classes.spendthrift.payers)).toBeGreaterThanOrEqual(
      total(runA.classes.spendthrift.payers),
    );
  });
});

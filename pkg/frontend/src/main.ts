// What-if console wiring: sliders from /api/defaults, debounced re-runs,
// six chart panels, seed pinning, and side-by-side comparison of two runs.

import { ApiError, ServiceClient } from "./api.js";
import {
  SliderSpec,
  scenarioDocument,
  sliderForErrorField,
  sliderSpecs,
  snapToStep,
  stepDecimals,
} from "./controls.js";
import { ChartSeries, drawChart } from "./charts.js";
import {
  compareSummaries,
  describeTrend,
  formatNumber,
  seriesExtent,
  trailingAverage,
} from "./series.js";
import type { SimulateResponse } from "./types.js";
import { CLASS_NAMES } from "./types.js";
import { DEFAULT_STATE, UiState, decodeState, encodeState } from "./urlstate.js";

const CLASS_COLORS: Record<string, string> = {
  tightwad: "#81a1c1",
  average_spender: "#d08770",
  spendthrift: "#bf616a",
};
const AGGREGATE_COLOR = "#a3be8c";
const DEBOUNCE_MS = 300;

const client = new ServiceClient("");

interface App {
  specs: SliderSpec[];
  values: Record<string, number>;
  state: UiState;
  lastResponse?: SimulateResponse;
  baseline?: SimulateResponse;
  requestCounter: number;
  debounceHandle: number | undefined;
}

const app: App = {
  specs: [],
  values: {},
  state: { ...DEFAULT_STATE, overrides: {} },
  requestCounter: 0,
  debounceHandle: undefined,
};

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

// ---------------------------------------------------------------------------
// controls
// ---------------------------------------------------------------------------

function buildControls(): void {
  const host = byId<HTMLDivElement>("controls");
  host.textContent = "";
  for (const spec of app.specs) {
    const row = document.createElement("div");
    row.className = "control-row";
    row.dataset.path = spec.path;

    const label = document.createElement("label");
    label.textContent = spec.label;

    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = String(spec.min);
    slider.max = String(spec.max);
    slider.step = String(spec.step);
    slider.value = String(app.values[spec.path]);

    const number = document.createElement("input");
    number.type = "number";
    number.min = String(spec.min);
    number.max = String(spec.max);
    number.step = String(spec.step);
    number.value = app.values[spec.path].toFixed(stepDecimals(spec.step));

    const error = document.createElement("div");
    error.className = "control-error";

    const apply = (raw: number) => {
      const snapped = snapToStep(raw, spec);
      app.values[spec.path] = snapped;
      slider.value = String(snapped);
      number.value = snapped.toFixed(stepDecimals(spec.step));
      error.textContent = "";
      syncStateFromControls();
      scheduleRun();
    };
    slider.addEventListener("input", () => apply(Number(slider.value)));
    number.addEventListener("change", () => apply(Number(number.value)));

    row.append(label, slider, number, error);
    host.append(row);
  }
}

function setControlsEnabled(enabled: boolean): void {
  document
    .querySelectorAll<HTMLInputElement>("#controls input, #toolbar input, #toolbar button")
    .forEach((node) => {
      node.disabled = !enabled;
    });
}

function showControlError(field: string, message: string): void {
  const spec = sliderForErrorField(field, app.specs);
  if (!spec) return;
  const row = document.querySelector<HTMLDivElement>(`.control-row[data-path="${spec.path}"]`);
  const slot = row?.querySelector<HTMLDivElement>(".control-error");
  if (slot) slot.textContent = message;
}

function syncStateFromControls(): void {
  const overrides: Record<string, number> = {};
  for (const spec of app.specs) {
    if (app.values[spec.path] !== spec.defaultValue) overrides[spec.path] = app.values[spec.path];
  }
  app.state.overrides = overrides;
  const seedField = byId<HTMLInputElement>("seed");
  app.state.seed = seedField.value === "" ? undefined : Number(seedField.value);
  app.state.averaged = byId<HTMLInputElement>("averaged").checked;
  app.state.downsample = byId<HTMLInputElement>("downsample").checked ? 10 : 1;
  window.location.hash = encodeState(app.state);
}

function applyStateToControls(): void {
  for (const spec of app.specs) {
    const override = app.state.overrides[spec.path];
    app.values[spec.path] = override === undefined ? spec.defaultValue : snapToStep(override, spec);
  }
  byId<HTMLInputElement>("seed").value = app.state.seed === undefined ? "" : String(app.state.seed);
  byId<HTMLInputElement>("averaged").checked = app.state.averaged;
  byId<HTMLInputElement>("downsample").checked = app.state.downsample > 1;
}

// ---------------------------------------------------------------------------
// running
// ---------------------------------------------------------------------------

function scheduleRun(): void {
  if (!byId<HTMLInputElement>("autorun").checked) return;
  if (app.debounceHandle !== undefined) window.clearTimeout(app.debounceHandle);
  app.debounceHandle = window.setTimeout(() => void runCurrent(), DEBOUNCE_MS);
}

async function runCurrent(): Promise<void> {
  const ticket = ++app.requestCounter;
  const status = byId<HTMLSpanElement>("status");
  status.textContent = "running…";
  document.querySelectorAll<HTMLDivElement>(".control-error").forEach((n) => (n.textContent = ""));
  try {
    const response = await client.simulate(
      scenarioDocument(app.values),
      app.state.seed,
      app.state.downsample,
    );
    if (ticket !== app.requestCounter) return; // a newer request superseded this one
    app.lastResponse = response;
    status.textContent = `seed ${response.seed_used} · ${response.run_millis.toFixed(1)} ms`;
    byId<HTMLButtonElement>("pin-seed").dataset.seed = String(response.seed_used);
    renderAll();
  } catch (error) {
    if (ticket !== app.requestCounter) return;
    if (error instanceof ApiError && error.status === 400) {
      status.textContent = "rejected by the service";
      for (const detail of error.errors) showControlError(detail.field, detail.message);
    } else {
      status.textContent = "service unreachable";
      showBanner();
    }
  }
}

// ---------------------------------------------------------------------------
// rendering
// ---------------------------------------------------------------------------

function maybeAverage(series: number[], window: number): number[] {
  return app.state.averaged ? trailingAverage(series, window) : series;
}

function metricPanels(): Array<{
  canvasId: string;
  title: string;
  unit: string;
  pick: (r: SimulateResponse) => Record<string, number[]>;
  averaged: boolean;
}> {
  return [
    {
      canvasId: "chart-revenue",
      title: "Revenue per step",
      unit: "$/step",
      pick: (r) => Object.fromEntries(CLASS_NAMES.map((c) => [c, r.classes[c].revenue])),
      averaged: true,
    },
    {
      canvasId: "chart-cumulative",
      title: "Cumulative revenue per class",
      unit: "$",
      pick: (r) => Object.fromEntries(CLASS_NAMES.map((c) => [c, r.classes[c].cumulative_revenue])),
      averaged: false,
    },
    {
      canvasId: "chart-btv",
      title: "Buy-to-Visit Ratio",
      unit: "%",
      pick: (r) => Object.fromEntries(CLASS_NAMES.map((c) => [c, r.classes[c].buy_to_visit])),
      averaged: true,
    },
    {
      canvasId: "chart-throughput",
      title: "Revenue Throughput",
      unit: "$/s",
      pick: (r) => Object.fromEntries(CLASS_NAMES.map((c) => [c, r.classes[c].revenue_throughput])),
      averaged: true,
    },
    {
      canvasId: "chart-loss",
      title: "Potential Loss Throughput",
      unit: "$/s",
      pick: (r) =>
        Object.fromEntries(CLASS_NAMES.map((c) => [c, r.classes[c].potential_loss_throughput])),
      averaged: true,
    },
  ];
}

function renderAll(): void {
  const response = app.lastResponse;
  if (!response) return;
  const window_ = response.summary.settings.window;

  for (const panel of metricPanels()) {
    const current = panel.pick(response);
    const baseline = app.baseline ? panel.pick(app.baseline) : undefined;
    const series: ChartSeries[] = [];
    const forExtent: number[][] = [];

    for (const name of CLASS_NAMES) {
      const points = panel.averaged ? maybeAverage(current[name], window_) : current[name];
      series.push({ label: name.replace("_", " "), color: CLASS_COLORS[name], points });
      forExtent.push(points);
      if (baseline) {
        const basePoints = panel.averaged ? maybeAverage(baseline[name], window_) : baseline[name];
        series.push({ label: "", color: CLASS_COLORS[name], points: basePoints, dashed: true });
        forExtent.push(basePoints);
      }
    }
    drawChart(byId<HTMLCanvasElement>(panel.canvasId), response.times, series, {
      title: panel.title + (baseline ? " (baseline dashed)" : ""),
      unit: panel.unit,
      yExtent: seriesExtent(forExtent),
    });
  }

  // aggregate income panel with the fitted trend overlaid
  const aggregateSeries: ChartSeries[] = [
    { label: "aggregate", color: AGGREGATE_COLOR, points: response.aggregate.cumulative_revenue },
  ];
  const extents = [response.aggregate.cumulative_revenue];
  if (app.baseline) {
    aggregateSeries.push({
      label: "baseline",
      color: "#8fbcbb",
      points: app.baseline.aggregate.cumulative_revenue,
      dashed: true,
    });
    extents.push(app.baseline.aggregate.cumulative_revenue);
  }
  const trend = response.summary.groups.aggregate.trend;
  drawChart(byId<HTMLCanvasElement>("chart-income"), response.times, aggregateSeries, {
    title: "Total sales income",
    unit: "$",
    yExtent: seriesExtent(extents),
    trend: { slope: trend.slope, intercept: trend.intercept },
  });
  byId<HTMLDivElement>("trend-stats").textContent = describeTrend(response.summary.groups.aggregate);

  renderComparison();
}

function renderComparison(): void {
  const host = byId<HTMLDivElement>("compare");
  if (!app.baseline || !app.lastResponse) {
    host.classList.add("hidden");
    return;
  }
  host.classList.remove("hidden");
  const delta = compareSummaries(app.baseline.summary, app.lastResponse.summary);
  const lines = [
    `Δ slope ${formatNumber(delta.deltaSlope)} $/s`,
    `Δ intercept ${formatNumber(delta.deltaIntercept)} $`,
    `Δ R² ${formatNumber(delta.deltaRSquared, 6)}`,
  ];
  for (const band of delta.bands) {
    if (band.group === "aggregate") continue;
    lines.push(
      `Δ ${band.metric.replace(/_/g, " ")} · ${band.group.replace("_", " ")}: ` +
        `[${formatNumber(band.deltaLo)}, ${formatNumber(band.deltaHi)}]`,
    );
  }
  byId<HTMLDivElement>("compare-body").textContent = lines.join("\n");
}

// ---------------------------------------------------------------------------
// bootstrapping
// ---------------------------------------------------------------------------

function showBanner(): void {
  byId<HTMLDivElement>("banner").classList.remove("hidden");
  setControlsEnabled(false);
}

function hideBanner(): void {
  byId<HTMLDivElement>("banner").classList.add("hidden");
  setControlsEnabled(true);
}

async function init(): Promise<void> {
  app.state = decodeState(window.location.hash);
  try {
    const defaults = await client.defaults();
    app.specs = sliderSpecs(defaults.ranges);
  } catch {
    showBanner();
    return;
  }
  hideBanner();
  applyStateToControls();
  buildControls();
  await runCurrent();
}

function wireToolbar(): void {
  byId<HTMLButtonElement>("run").addEventListener("click", () => void runCurrent());
  byId<HTMLButtonElement>("retry").addEventListener("click", () => void init());
  byId<HTMLInputElement>("seed").addEventListener("change", () => {
    syncStateFromControls();
    scheduleRun();
  });
  byId<HTMLButtonElement>("pin-seed").addEventListener("click", (event) => {
    const seed = (event.currentTarget as HTMLButtonElement).dataset.seed;
    if (seed === undefined) return;
    byId<HTMLInputElement>("seed").value = seed;
    syncStateFromControls();
  });
  byId<HTMLInputElement>("averaged").addEventListener("change", () => {
    syncStateFromControls();
    renderAll();
  });
  byId<HTMLInputElement>("downsample").addEventListener("change", () => {
    syncStateFromControls();
    scheduleRun();
  });
  byId<HTMLButtonElement>("pin-baseline").addEventListener("click", () => {
    app.baseline = app.lastResponse;
    renderAll();
  });
  byId<HTMLButtonElement>("clear-baseline").addEventListener("click", () => {
    app.baseline = undefined;
    renderAll();
  });
  byId<HTMLButtonElement>("reset").addEventListener("click", () => {
    app.state = { ...DEFAULT_STATE, overrides: {} };
    applyStateToControls();
    buildControls();
    syncStateFromControls();
    scheduleRun();
  });
}

document.addEventListener("DOMContentLoaded", () => {
  wireToolbar();
  void init();
});

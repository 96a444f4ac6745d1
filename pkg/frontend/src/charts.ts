// Minimal canvas line charts; no dependencies, shared-scale aware so two runs
// can be compared on identical axes.

import { seriesExtent } from "./series.js";

export interface ChartSeries {
  label: string;
  color: string;
  points: number[];
  dashed?: boolean;
}

export interface TrendOverlay {
  slope: number;
  intercept: number;
}

export interface ChartOptions {
  title: string;
  unit: string;
  yExtent?: [number, number];
  trend?: TrendOverlay;
}

const MARGIN = { top: 26, right: 12, bottom: 22, left: 56 };

function niceTicks(lo: number, hi: number, count: number): number[] {
  const span = hi - lo || 1;
  const rawStep = span / Math.max(count - 1, 1);
  const magnitude = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const residual = rawStep / magnitude;
  const step = (residual >= 5 ? 5 : residual >= 2 ? 2 : 1) * magnitude;
  const start = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= hi + 1e-12; v += step) ticks.push(v);
  return ticks;
}

function formatTick(value: number): string {
  const magnitude = Math.abs(value);
  if (magnitude !== 0 && (magnitude >= 100000 || magnitude < 0.001)) return value.toExponential(0);
  return Number(value.toPrecision(4)).toString();
}

export function drawChart(
  canvas: HTMLCanvasElement,
  times: number[],
  series: ChartSeries[],
  options: ChartOptions,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const ratio = window.devicePixelRatio || 1;
  const width = canvas.clientWidth || 420;
  const height = canvas.clientHeight || 220;
  canvas.width = width * ratio;
  canvas.height = height * ratio;
  ctx.setTransform(ratio, 0, 0, ratio, 0, 0);
  ctx.clearRect(0, 0, width, height);

  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;
  const tMax = times.length ? times[times.length - 1] : 1;
  const [rawLo, rawHi] = options.yExtent ?? seriesExtent(series.map((s) => s.points));
  const yLo = Math.min(rawLo, 0);
  const pad = (rawHi - yLo) * 0.05 || 0.5;
  const yHi = rawHi + pad;

  const x = (t: number) => MARGIN.left + (t / (tMax || 1)) * plotW;
  const y = (v: number) => MARGIN.top + plotH - ((v - yLo) / (yHi - yLo)) * plotH;

  // frame and gridlines
  ctx.strokeStyle = "#3b4252";
  ctx.fillStyle = "#9aa5b1";
  ctx.lineWidth = 1;
  ctx.font = "11px system-ui, sans-serif";
  for (const tick of niceTicks(yLo, yHi, 5)) {
    const py = y(tick);
    ctx.beginPath();
    ctx.moveTo(MARGIN.left, py);
    ctx.lineTo(width - MARGIN.right, py);
    ctx.stroke();
    ctx.textAlign = "right";
    ctx.fillText(formatTick(tick), MARGIN.left - 6, py + 3);
  }
  for (const tick of niceTicks(0, tMax, 6)) {
    ctx.textAlign = "center";
    ctx.fillText(formatTick(tick), x(tick), height - 6);
  }

  ctx.fillStyle = "#d8dee9";
  ctx.textAlign = "left";
  ctx.font = "12px system-ui, sans-serif";
  ctx.fillText(`${options.title} [${options.unit}]`, MARGIN.left, 15);

  for (const one of series) {
    if (!one.points.length) continue;
    ctx.strokeStyle = one.color;
    ctx.lineWidth = one.dashed ? 1.2 : 1.8;
    ctx.setLineDash(one.dashed ? [5, 4] : []);
    ctx.beginPath();
    one.points.forEach((value, i) => {
      const px = x(times[i] ?? i);
      const py = y(value);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
  }
  ctx.setLineDash([]);

  if (options.trend) {
    const { slope, intercept } = options.trend;
    ctx.strokeStyle = "#ebcb8b";
    ctx.lineWidth = 1.4;
    ctx.setLineDash([8, 5]);
    ctx.beginPath();
    ctx.moveTo(x(0), y(intercept));
    ctx.lineTo(x(tMax), y(intercept + slope * tMax));
    ctx.stroke();
    ctx.setLineDash([]);
  }

  // legend across the top right
  let legendX = width - MARGIN.right;
  ctx.font = "11px system-ui, sans-serif";
  for (const one of [...series].reverse()) {
    ctx.textAlign = "right";
    const text = one.label;
    ctx.fillStyle = one.color;
    ctx.fillText(text, legendX, 15);
    legendX -= ctx.measureText(text).width + 14;
  }
}

/**
 * Chart assembly: group CSV rows into series, build linear or logarithmic
 * axes and draw lines, markers, ticks and a legend onto a raster.
 */

import { CsvTable, SchemaError, numeric, requireColumns } from "./csv.js";
import { Raster, Rgb } from "./raster.js";

export interface PlotSpec {
  csv: string | string[];
  out: string;
  x?: string;
  y?: string;
  series?: string[];
  log_y?: boolean;
  title?: string;
  x_label?: string;
  y_label?: string;
  width?: number;
  height?: number;
}

export interface Series {
  label: string;
  points: { x: number; y: number }[];
}

const PALETTE: Rgb[] = [
  [178, 34, 34],
  [46, 90, 172],
  [34, 139, 34],
  [230, 126, 34],
  [106, 61, 154],
  [0, 139, 139],
  [199, 21, 133],
];

export function buildSeries(
  table: CsvTable,
  xColumn: string,
  yColumn: string,
  seriesColumns: string[],
): Series[] {
  requireColumns(table, [xColumn, yColumn, ...seriesColumns]);
  const groups = new Map<string, Series>();
  for (const row of table.rows) {
    const x = numeric(row, xColumn);
    const y = numeric(row, yColumn);
    const label = seriesColumns
      .map((col) => (col === "L" ? `L=${row[col]}` : row[col]))
      .join(" ");
    let series = groups.get(label);
    if (!series) {
      series = { label, points: [] };
      groups.set(label, series);
    }
    series.points.push({ x, y });
  }
  for (const series of groups.values()) {
    series.points.sort((a, b) => a.x - b.x);
  }
  return [...groups.values()];
}

function niceTicks(lo: number, hi: number, count = 5): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const candidates = [step, 2 * step, 5 * step, 10 * step];
  const chosen = candidates.find((s) => span / s <= count + 1) ?? 10 * step;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / chosen) * chosen; v <= hi + 1e-12; v += chosen) {
    ticks.push(Number(v.toPrecision(10)));
  }
  return ticks;
}

function formatTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 0.01 && a < 10000) {
    return Number(v.toPrecision(4)).toString();
  }
  const exp = Math.floor(Math.log10(a));
  const mant = v / Math.pow(10, exp);
  return `${Number(mant.toPrecision(2))}E${exp}`;
}

export function drawChart(spec: PlotSpec, seriesList: Series[]): Raster {
  const width = spec.width ?? 900;
  const height = spec.height ?? 600;
  const raster = new Raster(width, height);
  const ink: Rgb = [20, 20, 20];
  const grid: Rgb = [220, 220, 220];

  const margin = { left: 90, right: 30, top: 48, bottom: 64 };
  const plotW = width - margin.left - margin.right;
  const plotH = height - margin.top - margin.bottom;

  const logY = Boolean(spec.log_y);
  const usable = seriesList.map((s) => ({
    label: s.label,
    points: s.points.filter((p) => !logY || p.y > 0),
  }));
  const allPoints = usable.flatMap((s) => s.points);
  if (allPoints.length === 0) {
    throw new SchemaError(
      logY
        ? "no positive values to place on a logarithmic axis"
        : "no data points to plot",
    );
  }

  const xs = allPoints.map((p) => p.x);
  const ys = allPoints.map((p) => (logY ? Math.log10(p.y) : p.y));
  let xLo = Math.min(...xs);
  let xHi = Math.max(...xs);
  let yLo = Math.min(...ys);
  let yHi = Math.max(...ys);
  if (xHi === xLo) {
    xLo -= 1;
    xHi += 1;
  }
  if (yHi === yLo) {
    yLo -= 1;
    yHi += 1;
  }
  const yPad = 0.06 * (yHi - yLo);
  yLo -= yPad;
  yHi += yPad;

  const toX = (x: number) => margin.left + ((x - xLo) / (xHi - xLo)) * plotW;
  const toY = (y: number) => {
    const v = logY ? Math.log10(y) : y;
    return margin.top + plotH - ((v - yLo) / (yHi - yLo)) * plotH;
  };

  // frame and ticks
  raster.rect(margin.left, margin.top, margin.left + plotW,
              margin.top + plotH, ink);
  for (const tx of niceTicks(xLo, xHi, 6)) {
    const px = toX(tx);
    raster.line(px, margin.top, px, margin.top + plotH, grid);
    raster.line(px, margin.top + plotH, px, margin.top + plotH + 4, ink);
    raster.textCentered(px, margin.top + plotH + 10, formatTick(tx), ink);
  }
  const yTickValues = logY
    ? logTicks(yLo, yHi)
    : niceTicks(yLo, yHi, 6).map((v) => v);
  for (const ty of yTickValues) {
    const value = logY ? Math.pow(10, ty) : ty;
    const py = toY(value);
    raster.line(margin.left, py, margin.left + plotW, py, grid);
    raster.line(margin.left - 4, py, margin.left, py, ink);
    const label = formatTick(value);
    raster.text(margin.left - 8 - label.length * 6, py - 3, label, ink);
  }

  // series
  usable.forEach((series, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    const pts = series.points;
    for (let i = 1; i < pts.length; i++) {
      raster.line(toX(pts[i - 1].x), toY(pts[i - 1].y),
                  toX(pts[i].x), toY(pts[i].y), color, 2);
    }
    for (const p of pts) {
      raster.marker(toX(p.x), toY(p.y), color);
    }
  });

  // legend
  let ly = margin.top + 8;
  const lx = margin.left + plotW - 8;
  for (const [idx, series] of usable.entries()) {
    const color = PALETTE[idx % PALETTE.length];
    const labelWidth = series.label.length * 6;
    raster.fillRect(lx - labelWidth - 26, ly, lx - labelWidth - 10, ly + 6,
                    color);
    raster.text(lx - labelWidth, ly, series.label, ink);
    ly += 14;
  }

  // titles
  if (spec.title) {
    raster.textCentered(margin.left + plotW / 2, 16, spec.title, ink, 2);
  }
  if (spec.x_label) {
    raster.textCentered(margin.left + plotW / 2,
                        margin.top + plotH + 34, spec.x_label, ink, 2);
  }
  if (spec.y_label) {
    raster.text(10, margin.top - 24, spec.y_label, ink, 2);
  }
  return raster;
}

function logTicks(loExp: number, hiExp: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(loExp); e <= Math.floor(hiExp); e++) {
    ticks.push(e);
  }
  if (ticks.length === 0) {
    ticks.push((loExp + hiExp) / 2);
  }
  return ticks;
}

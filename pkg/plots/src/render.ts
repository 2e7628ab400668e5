/**
 * Spec-driven rendering: read harness CSV file(s), build the configured
 * series and write one PNG chart.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { PlotSpec, Series, buildSeries, drawChart } from "./chart.js";
import { SchemaError, parseCsv } from "./csv.js";
import { encodePng } from "./png.js";

export function loadSpec(path: string): PlotSpec {
  const raw = JSON.parse(readFileSync(path, "utf-8"));
  if (typeof raw.out !== "string" || raw.csv === undefined) {
    throw new SchemaError("plot spec needs 'csv' and 'out' paths");
  }
  return raw as PlotSpec;
}

export function render(spec: PlotSpec): string {
  const paths = Array.isArray(spec.csv) ? spec.csv : [spec.csv];
  if (paths.length === 0) {
    throw new SchemaError("plot spec lists no CSV inputs");
  }
  const xColumn = spec.x ?? "grid";
  const yColumn = spec.y ?? "nmse";
  const seriesColumns = spec.series ?? ["scheme", "L"];

  const seriesList: Series[] = [];
  for (const path of paths) {
    const table = parseCsv(readFileSync(path, "utf-8"));
    seriesList.push(...buildSeries(table, xColumn, yColumn, seriesColumns));
  }
  const raster = drawChart(spec, seriesList);
  writeFileSync(spec.out, encodePng(raster));
  return spec.out;
}

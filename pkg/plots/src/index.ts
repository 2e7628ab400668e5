export { PlotSpec, Series, buildSeries, drawChart } from "./chart.js";
export { CsvTable, SchemaError, numeric, parseCsv, requireColumns } from "./csv.js";
export { encodePng } from "./png.js";
export { Raster } from "./raster.js";
export { loadSpec, render } from "./render.js";

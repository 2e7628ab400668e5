/**
 * Harness CSV parsing with schema validation.
 *
 * The simulation harness writes plain comma-separated tables with a fixed
 * header (`grid,scheme,L,nmse,stderr,trials`), LF line endings and no
 * quoting, so splitting on commas is exact.
 */

export class SchemaError extends Error {}

export interface CsvTable {
  columns: string[];
  rows: Record<string, string>[];
}

export function parseCsv(text: string): CsvTable {
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("CSV is empty");
  }
  const columns = lines[0].split(",").map((c) => c.trim());
  if (columns.some((c) => c.length === 0)) {
    throw new SchemaError("CSV header has empty column names");
  }
  if (lines.length === 1) {
    throw new SchemaError("CSV has a header but no data rows");
  }
  const rows: Record<string, string>[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== columns.length) {
      throw new SchemaError(
        `row ${i} has ${cells.length} cells, expected ${columns.length}`,
      );
    }
    const row: Record<string, string> = {};
    columns.forEach((name, j) => {
      row[name] = cells[j];
    });
    rows.push(row);
  }
  return { columns, rows };
}

export function requireColumns(table: CsvTable, needed: string[]): void {
  for (const name of needed) {
    if (!table.columns.includes(name)) {
      throw new SchemaError(`CSV is missing required column '${name}'`);
    }
  }
}

export function numeric(row: Record<string, string>, column: string): number {
  const value = Number(row[column]);
  if (!Number.isFinite(value)) {
    throw new SchemaError(
      `column '${column}' holds non-numeric value '${row[column]}'`,
    );
  }
  return value;
}

#!/usr/bin/env node
/**
 * Command line: `plots render --spec <json>`.
 * Exit codes: 0 on success, 1 on any error (schema problems included).
 */

import { SchemaError } from "./csv.js";
import { loadSpec, render } from "./render.js";

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  if (command !== "render") {
    console.error("usage: plots render --spec <json>");
    return 1;
  }
  const flagIndex = rest.indexOf("--spec");
  if (flagIndex === -1 || flagIndex + 1 >= rest.length) {
    console.error("render needs --spec <json path>");
    return 1;
  }
  try {
    const out = render(loadSpec(rest[flagIndex + 1]));
    console.log(`chart written to ${out}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
    } else {
      console.error(`error: ${(err as Error).message}`);
    }
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}

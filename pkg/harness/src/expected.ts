// Expected-values file parsing. Each record is `<label> <count> <values...>`
// with 17-significant-digit decimals, which JavaScript's Number() parses to
// the identical float64 the emitter held.

import { readFileSync } from "node:fs";

export type ExpectedRecords = Map<string, Float64Array>;

export function parseExpected(text: string): ExpectedRecords {
  const records: ExpectedRecords = new Map();
  for (const rawLine of text.split("\n")) {
    const line = rawLine.trim();
    if (line === "" || line.startsWith("#")) continue;
    const tokens = line.split(/\s+/);
    const label = tokens[0];
    const count = Number(tokens[1]);
    const values = tokens.slice(2).map(Number);
    if (values.length !== count) {
      throw new Error(`record ${label}: declared ${count} values, found ${values.length}`);
    }
    if (values.some((v) => Number.isNaN(v))) {
      throw new Error(`record ${label}: unparseable value`);
    }
    records.set(label, Float64Array.from(values));
  }
  return records;
}

export function loadExpected(path: string): ExpectedRecords {
  return parseExpected(readFileSync(path, "utf-8"));
}

export function requireRecord(records: ExpectedRecords, label: string): Float64Array {
  const values = records.get(label);
  if (values === undefined) throw new Error(`expected file is missing record ${label}`);
  return values;
}

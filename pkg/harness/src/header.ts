// Interface-header parsing: the shipped tnwp.h is this harness's only
// compile-time dependency on the library. Prototypes are one per line;
// const-ness of pointer parameters encodes direction (const = host-to-lib,
// non-const = lib-to-host), which maps onto koffi's _Out_ annotation.

import { readFileSync } from "node:fs";

export interface Prototype {
  name: string;
  /** koffi-ready declaration string */
  declaration: string;
}

const PROTOTYPE_RE = /^int32_t\s+(tnwp_\w+)\s*\((.*)\);$/;
const DEFINE_RE = /^#define\s+(TNWP_[A-Z_]+)\s+(\d+)$/;

function toKoffiParameter(param: string): string {
  const p = param.trim();
  if (!p.includes("*") || p.startsWith("const ")) {
    return p;
  }
  // koffi has no first-class char buffers; byte buffers are uint8_t
  return "_Out_ " + p.replace(/^char\s*\*/, "uint8_t *");
}

export function parsePrototypes(headerText: string): Prototype[] {
  const prototypes: Prototype[] = [];
  for (const line of headerText.split("\n")) {
    const match = PROTOTYPE_RE.exec(line.trim());
    if (!match) continue;
    const [, name, params] = match;
    const mapped = params.split(",").map(toKoffiParameter).join(", ");
    prototypes.push({ name, declaration: `int32_t ${name}(${mapped})` });
  }
  return prototypes;
}

export function parseStatusCodes(headerText: string): Record<string, number> {
  const codes: Record<string, number> = {};
  for (const line of headerText.split("\n")) {
    const match = DEFINE_RE.exec(line.trim());
    if (match && match[1] !== "TNWP_ABI_VERSION") {
      codes[match[1]] = Number(match[2]);
    }
  }
  return codes;
}

export function loadHeader(headerPath: string): {
  prototypes: Prototype[];
  status: Record<string, number>;
} {
  const text = readFileSync(headerPath, "utf-8");
  const prototypes = parsePrototypes(text);
  if (prototypes.length === 0) {
    throw new Error(`no tnwp_ prototypes found in ${headerPath}`);
  }
  return { prototypes, status: parseStatusCodes(text) };
}

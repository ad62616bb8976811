// Default artifact locations relative to the repository root, overridable
// through the environment for out-of-tree runs.

import { fileURLToPath } from "node:url";
import path from "node:path";

export const REPO_ROOT = path.resolve(
  path.dirname(fileURLToPath(import.meta.url)), "..", "..", "..",
);

export function defaultLibPath(): string {
  return process.env.TNWP_LIB ?? path.join(REPO_ROOT, "build", "libtnwp.so");
}

export function defaultHeaderPath(): string {
  return process.env.TNWP_HEADER ?? path.join(REPO_ROOT, "include", "tnwp.h");
}

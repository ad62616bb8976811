// Host-side entry point: node dist/src/main.js <model.tnwp> <expected-file>
// Exits 0 iff every boundary call succeeds and every output matches the
// expected file bit for bit; otherwise prints the failing labels and exits 1.

import { loadExpected } from "./expected.js";
import { runHarness } from "./harness.js";
import { openLibrary } from "./library.js";
import { defaultHeaderPath, defaultLibPath } from "./paths.js";

function main(argv: string[]): number {
  if (argv.length < 2) {
    console.error("usage: main.js <model.tnwp> <expected-file> [lib.so] [tnwp.h]");
    return 2;
  }
  const [modelPath, expectedPath, libArg, headerArg] = argv;
  const lib = openLibrary(libArg ?? defaultLibPath(), headerArg ?? defaultHeaderPath());
  const records = loadExpected(expectedPath);
  const { failures, checks } = runHarness(lib, modelPath, records);
  if (failures.length > 0) {
    for (const failure of failures) {
      console.error(`FAIL ${failure}`);
    }
    return 1;
  }
  console.log(`OK ${checks} checks, all outputs bit-identical`);
  return 0;
}

process.exit(main(process.argv.slice(2)));

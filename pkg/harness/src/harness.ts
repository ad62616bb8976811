// Full-lifecycle exercise of the shared library against an expected-values
// file: new -> forward -> tangent -> adjoint -> batched forward -> delete,
// plus the documented failure paths (wrong extents, stale handle). The
// harness holds no numerical logic; it only replays inputs and compares
// outputs bit for bit (Object.is, so signed zeros count).

import { requireRecord, type ExpectedRecords } from "./expected.js";
import type { TnwpLibrary } from "./library.js";

export interface HarnessResult {
  failures: string[];
  checks: number;
}

function compareBitwise(label: string, actual: Float64Array, expected: Float64Array,
                        failures: string[]): void {
  if (actual.length !== expected.length) {
    failures.push(`${label}: length ${actual.length} != ${expected.length}`);
    return;
  }
  for (let i = 0; i < actual.length; i++) {
    if (!Object.is(actual[i], expected[i])) {
      failures.push(`${label}: element ${i} is ${actual[i]}, expected ${expected[i]}`);
      return;
    }
  }
}

export function runHarness(
  lib: TnwpLibrary,
  modelPath: string,
  records: ExpectedRecords,
): HarnessResult {
  const failures: string[] = [];
  let checks = 0;
  const st = lib.status;

  const inShape = Array.from(requireRecord(records, "in_shape"), (v) => BigInt(v));
  const outShape = Array.from(requireRecord(records, "out_shape"), (v) => BigInt(v));
  const batch = BigInt(requireRecord(records, "batch")[0]);
  const x = requireRecord(records, "x");
  const dx = requireRecord(records, "dx");
  const ystar = requireRecord(records, "ystar");
  const xs = requireRecord(records, "xs");
  const n = x.length;
  const m = requireRecord(records, "y").length;

  const expectStatus = (label: string, got: number, want: number) => {
    checks++;
    if (got !== want) {
      failures.push(`${label}: status ${got}, expected ${want} (${lib.lastErrorDetail()})`);
    }
    return got === want;
  };

  const { status, handle } = lib.modelNew(modelPath, "cpu");
  if (!expectStatus("model_new", status, st.TNWP_OK)) {
    return { failures, checks };
  }

  const y = new Float64Array(m);
  if (expectStatus("model_forward", lib.modelForward(handle, x, inShape, y, outShape), st.TNWP_OK)) {
    checks++;
    compareBitwise("y", y, requireRecord(records, "y"), failures);
  }

  const dy = new Float64Array(m);
  if (expectStatus("model_tangent",
                   lib.modelTangent(handle, x, inShape, dx, inShape, dy, outShape),
                   st.TNWP_OK)) {
    checks++;
    compareBitwise("dy", dy, requireRecord(records, "dy"), failures);
  }

  const xstar = new Float64Array(n);
  if (expectStatus("model_adjoint",
                   lib.modelAdjoint(handle, x, inShape, ystar, outShape, xstar, inShape),
                   st.TNWP_OK)) {
    checks++;
    compareBitwise("xstar", xstar, requireRecord(records, "xstar"), failures);
  }

  const ys = new Float64Array(m * Number(batch));
  if (expectStatus("model_forward_batch",
                   lib.modelForwardBatch(handle, xs, inShape, ys, outShape, batch, 2n),
                   st.TNWP_OK)) {
    checks++;
    compareBitwise("ys", ys, requireRecord(records, "ys"), failures);
  }

  // documented failure paths: wrong extents, then stale handle after delete
  const wrongExtents = inShape.slice();
  wrongExtents[wrongExtents.length - 1] += 1n;
  expectStatus("shape_mismatch_probe",
               lib.modelForward(handle, x, wrongExtents, y, outShape),
               st.TNWP_SHAPE_MISMATCH);
  checks++;
  if (lib.lastErrorDetail() === "") {
    failures.push("shape_mismatch_probe: error detail is empty");
  }

  expectStatus("model_delete", lib.modelDelete(handle), st.TNWP_OK);
  expectStatus("stale_forward_probe",
               lib.modelForward(handle, x, inShape, y, outShape),
               st.TNWP_BAD_HANDLE);
  expectStatus("double_delete_probe", lib.modelDelete(handle), st.TNWP_BAD_HANDLE);

  return { failures, checks };
}

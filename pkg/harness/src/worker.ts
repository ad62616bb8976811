// Worker-thread body for the concurrent-forward test: repeatedly runs a
// forward on a shared handle and reports whether every result matched the
// main thread's bit for bit.

import { parentPort, workerData } from "node:worker_threads";

import { openLibrary } from "./library.js";

interface WorkerInput {
  libPath: string;
  headerPath: string;
  handle: string;
  x: number[];
  inShape: number[];
  outShape: number[];
  expectedY: number[];
  iterations: number;
}

const input = workerData as WorkerInput;
const lib = openLibrary(input.libPath, input.headerPath);
const handle = BigInt(input.handle);
const x = Float64Array.from(input.x);
const inShape = input.inShape.map((v) => BigInt(v));
const outShape = input.outShape.map((v) => BigInt(v));

let ok = true;
for (let i = 0; i < input.iterations && ok; i++) {
  const y = new Float64Array(input.expectedY.length);
  const status = lib.modelForward(handle, x, inShape, y, outShape);
  ok = status === lib.status.TNWP_OK &&
    input.expectedY.every((v, j) => Object.is(v, y[j]));
}
parentPort!.postMessage(ok);

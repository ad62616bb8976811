// Thin typed veneer over the dlopen'd shared library. All symbol
// declarations come from the shipped header; nothing numerical happens here.

import koffi from "koffi";

import { loadHeader } from "./header.js";

export interface TnwpLibrary {
  status: Record<string, number>;
  modelNew(path: string, device: string): { status: number; handle: bigint };
  modelForward(
    handle: bigint,
    x: Float64Array, xExtents: bigint[],
    y: Float64Array, yExtents: bigint[],
  ): number;
  modelTangent(
    handle: bigint,
    x: Float64Array, xExtents: bigint[],
    dx: Float64Array, dxExtents: bigint[],
    dy: Float64Array, dyExtents: bigint[],
  ): number;
  modelAdjoint(
    handle: bigint,
    x: Float64Array, xExtents: bigint[],
    ystar: Float64Array, ystarExtents: bigint[],
    xstar: Float64Array, xstarExtents: bigint[],
  ): number;
  modelForwardBatch(
    handle: bigint,
    xs: Float64Array, xExtents: bigint[],
    ys: Float64Array, yExtents: bigint[],
    batch: bigint, chunk: bigint,
  ): number;
  modelDelete(handle: bigint): number;
  lastErrorDetail(): string;
}

function ext(extents: bigint[]): BigInt64Array {
  return new BigInt64Array(extents);
}

export function openLibrary(libPath: string, headerPath: string): TnwpLibrary {
  const { prototypes, status } = loadHeader(headerPath);
  const lib = koffi.load(libPath);
  const fn: Record<string, (...args: unknown[]) => unknown> = {};
  for (const proto of prototypes) {
    fn[proto.name] = lib.func(proto.declaration);
  }
  for (const required of [
    "tnwp_model_new", "tnwp_model_forward", "tnwp_model_tangent",
    "tnwp_model_adjoint", "tnwp_model_forward_batch", "tnwp_model_delete",
    "tnwp_last_error_detail",
  ]) {
    if (!(required in fn)) throw new Error(`header does not declare ${required}`);
  }

  return {
    status,
    modelNew(path, device) {
      const out = new BigInt64Array(1);
      const st = fn.tnwp_model_new(path, device, out) as number;
      return { status: st, handle: out[0] };
    },
    modelForward(handle, x, xExtents, y, yExtents) {
      return fn.tnwp_model_forward(
        handle, x, ext(xExtents), BigInt(xExtents.length),
        y, ext(yExtents), BigInt(yExtents.length),
      ) as number;
    },
    modelTangent(handle, x, xExtents, dx, dxExtents, dy, dyExtents) {
      return fn.tnwp_model_tangent(
        handle, x, ext(xExtents), BigInt(xExtents.length),
        dx, ext(dxExtents), BigInt(dxExtents.length),
        dy, ext(dyExtents), BigInt(dyExtents.length),
      ) as number;
    },
    modelAdjoint(handle, x, xExtents, ystar, ystarExtents, xstar, xstarExtents) {
      return fn.tnwp_model_adjoint(
        handle, x, ext(xExtents), BigInt(xExtents.length),
        ystar, ext(ystarExtents), BigInt(ystarExtents.length),
        xstar, ext(xstarExtents), BigInt(xstarExtents.length),
      ) as number;
    },
    modelForwardBatch(handle, xs, xExtents, ys, yExtents, batch, chunk) {
      return fn.tnwp_model_forward_batch(
        handle, xs, ext(xExtents), BigInt(xExtents.length),
        ys, ext(yExtents), BigInt(yExtents.length),
        batch, chunk,
      ) as number;
    },
    modelDelete(handle) {
      return fn.tnwp_model_delete(handle) as number;
    },
    lastErrorDetail() {
      const buf = new Uint8Array(1024);
      fn.tnwp_last_error_detail(buf, 1024n);
      const nul = buf.indexOf(0);
      return Buffer.from(buf.subarray(0, nul < 0 ? buf.length : nul)).toString("utf-8");
    },
  };
}

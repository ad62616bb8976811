// End-to-end harness tests. The before() hook builds the shared library and
// asks the primary CLI for fixture models plus expected-values files; the
// tests then drive everything through the C boundary only.

import assert from "node:assert/strict";
import { execFileSync } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import path from "node:path";
import { before, describe, test } from "node:test";
import { Worker } from "node:worker_threads";
import { fileURLToPath } from "node:url";

import { loadExpected, parseExpected, requireRecord } from "../src/expected.js";
import { parsePrototypes, parseStatusCodes } from "../src/header.js";
import { runHarness } from "../src/harness.js";
import { openLibrary, type TnwpLibrary } from "../src/library.js";
import { defaultHeaderPath, defaultLibPath, REPO_ROOT } from "../src/paths.js";

const PYTHON = process.env.TNWP_PYTHON ?? "python3";
const FIXTURES = ["identity", "dense", "tanh2", "gwd_reference"];
const EXPECTED_SEED = "7";

let workDir: string;
let lib: TnwpLibrary;

function python(...args: string[]): string {
  return execFileSync(PYTHON, args, { cwd: REPO_ROOT, encoding: "utf-8" });
}

before(() => {
  workDir = mkdtempSync(path.join(tmpdir(), "tnwp-harness-"));
  python("-m", "tnwp.embed", "--out", path.dirname(defaultLibPath()));
  assert.ok(existsSync(defaultLibPath()), "shared library was not built");
  python("-m", "tnwp.cli", "fixtures", "--out", workDir, "--seed", "0");
  for (const name of FIXTURES) {
    python(
      "-m", "tnwp.cli", "expected",
      "--model", path.join(workDir, `${name}.tnwp`),
      "--seed", EXPECTED_SEED,
      "--out", path.join(workDir, `${name}.expected`),
    );
  }
  lib = openLibrary(defaultLibPath(), defaultHeaderPath());
}, { timeout: 180_000 });

describe("header parsing", () => {
  test("declares all seven symbols with direction annotations", () => {
    const text = readFileSync(defaultHeaderPath(), "utf-8");
    const prototypes = parsePrototypes(text);
    assert.equal(prototypes.length, 7);
    const byName = new Map(prototypes.map((p) => [p.name, p.declaration]));
    assert.match(byName.get("tnwp_model_new")!, /_Out_ int64_t \*out_handle/);
    assert.match(byName.get("tnwp_model_forward")!, /_Out_ double \*y/);
    assert.match(byName.get("tnwp_last_error_detail")!, /_Out_ uint8_t \*buffer/);
    assert.doesNotMatch(byName.get("tnwp_model_forward")!, /_Out_ const/);
  });

  test("status codes come from the header", () => {
    const codes = parseStatusCodes(readFileSync(defaultHeaderPath(), "utf-8"));
    assert.equal(codes.TNWP_OK, 0);
    assert.equal(codes.TNWP_BAD_HANDLE, 1);
    assert.equal(codes.TNWP_SHAPE_MISMATCH, 2);
    assert.equal(codes.TNWP_IO_ERROR, 3);
    assert.equal(codes.TNWP_DEVICE_UNAVAILABLE, 4);
    assert.equal(codes.TNWP_INVALID_ARGUMENT, 5);
    assert.equal(codes.TNWP_INTERNAL_ERROR, 6);
  });
});

describe("lifecycle against expected values", () => {
  for (const name of FIXTURES) {
    test(`${name} fixture is bit-for-bit clean`, { timeout: 120_000 }, () => {
      const records = loadExpected(path.join(workDir, `${name}.expected`));
      const { failures, checks } = runHarness(lib, path.join(workDir, `${name}.tnwp`), records);
      assert.deepEqual(failures, []);
      assert.ok(checks >= 10, `only ${checks} checks ran`);
    });
  }

  test("missing model file reports io-error", () => {
    const { status } = lib.modelNew(path.join(workDir, "missing.tnwp"), "cpu");
    assert.equal(status, lib.status.TNWP_IO_ERROR);
    assert.notEqual(lib.lastErrorDetail(), "");
  });

  test("gpu device reports device-unavailable", () => {
    const { status } = lib.modelNew(path.join(workDir, "identity.tnwp"), "gpu");
    assert.equal(status, lib.status.TNWP_DEVICE_UNAVAILABLE);
  });

  test("NULL pointer arguments fail without aborting the host", async () => {
    const koffi = (await import("koffi")).default;
    const raw = koffi.load(defaultLibPath());
    const modelNew = raw.func(
      "int32_t tnwp_model_new(const char *path, const char *device, _Out_ int64_t *out_handle)",
    );
    const out = new BigInt64Array(1);
    assert.equal(modelNew(null, "cpu", out), lib.status.TNWP_INVALID_ARGUMENT);
    assert.equal(modelNew(path.join(workDir, "identity.tnwp"), null, out),
                 lib.status.TNWP_INVALID_ARGUMENT);
  });
});

describe("fault injection", () => {
  test("a perturbed expected file fails naming the label", () => {
    const source = readFileSync(path.join(workDir, "dense.expected"), "utf-8");
    const perturbed = source
      .split("\n")
      .map((line) => {
        if (!line.startsWith("y ")) return line;
        const tokens = line.split(" ");
        tokens[2] = String(Number(tokens[2]) + 1e-9);
        return tokens.join(" ");
      })
      .join("\n");
    const records = parseExpected(perturbed);
    const { failures } = runHarness(lib, path.join(workDir, "dense.tnwp"), records);
    assert.ok(failures.length > 0);
    assert.match(failures[0], /^y: element 0/);
  });

  test("main.js exits nonzero on a perturbed file and zero on a clean one", () => {
    const mainJs = path.resolve(
      path.dirname(fileURLToPath(import.meta.url)), "..", "src", "main.js",
    );
    const clean = execFileSync("node", [
      mainJs, path.join(workDir, "identity.tnwp"), path.join(workDir, "identity.expected"),
    ], { encoding: "utf-8" });
    assert.match(clean, /OK \d+ checks/);

    const source = readFileSync(path.join(workDir, "identity.expected"), "utf-8");
    const corruptPath = path.join(workDir, "identity.corrupt.expected");
    writeFileSync(corruptPath, source.replace(/^xstar (\d+) ([^ ]+)/m, "xstar $1 123.456"));
    let failed = false;
    try {
      execFileSync("node", [mainJs, path.join(workDir, "identity.tnwp"), corruptPath], {
        encoding: "utf-8",
      });
    } catch (err: any) {
      failed = true;
      assert.equal(err.status, 1);
      assert.match(String(err.stderr), /FAIL xstar/);
    }
    assert.ok(failed, "perturbed expected file did not fail");
  });
});

describe("concurrency", () => {
  test("two threads share one handle for concurrent forwards", { timeout: 120_000 }, async () => {
    const records = loadExpected(path.join(workDir, "gwd_reference.expected"));
    const inShape = Array.from(requireRecord(records, "in_shape"));
    const outShape = Array.from(requireRecord(records, "out_shape"));
    const x = Array.from(requireRecord(records, "x"));
    const expectedY = Array.from(requireRecord(records, "y"));

    const { status, handle } = lib.modelNew(path.join(workDir, "gwd_reference.tnwp"), "cpu");
    assert.equal(status, lib.status.TNWP_OK);
    try {
      const workerJs = path.resolve(
        path.dirname(fileURLToPath(import.meta.url)), "..", "src", "worker.js",
      );
      const spawn = () =>
        new Promise<boolean>((resolve, reject) => {
          const worker = new Worker(workerJs, {
            workerData: {
              libPath: defaultLibPath(),
              headerPath: defaultHeaderPath(),
              handle: handle.toString(),
              x, inShape, outShape, expectedY,
              iterations: 25,
            },
          });
          worker.once("message", resolve);
          worker.once("error", reject);
        });
      const results = await Promise.all([spawn(), spawn()]);
      assert.deepEqual(results, [true, true]);
    } finally {
      assert.equal(lib.modelDelete(handle), lib.status.TNWP_OK);
    }
  });
});

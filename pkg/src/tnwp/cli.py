"""Command-line front end.

Subcommands:
  verify    tangent/adjoint consistency checks against independent oracles
  fixtures  write the golden model corpus
  bench     chunked-throughput measurement (re-asserts chunk invariance)
  fdvar     toy variational-assimilation demo (adjoint as gradient engine)
  expected  emit an expected-values file for foreign-host harnesses

Exit codes: 0 success / checks passed, 1 checks failed, 2 usage or load error.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import bridge
from .errors import TnwpError
from .expected import DEFAULT_BATCH, write_expected
from .fdvar import run_demo
from .fixtures import write_fixture_corpus
from .prng import Xorshift64Star
from .serialize import load_model
from .verify import DEFAULT_FD_CAP, run_verification


def _load_or_exit(path: str):
    try:
        return load_model(path)
    except (OSError, TnwpError) as exc:
        print(f"error: cannot load model {path!r}: {exc}", file=sys.stderr)
        raise SystemExit(2)


def cmd_verify(args: argparse.Namespace) -> int:
    graph = _load_or_exit(args.model)
    report = run_verification(graph, args.seed, args.samples, fd_cap=args.fd_cap)
    sys.stdout.write(report.render_text())
    if args.json_out:
        Path(args.json_out).write_text(report.to_json(), encoding="utf-8")
    return 0 if report.passed else 1


def cmd_fixtures(args: argparse.Namespace) -> int:
    for path in write_fixture_corpus(args.out, args.seed):
        print(path)
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    graph = _load_or_exit(args.model)
    status, handle = bridge.model_new(args.model, "cpu")
    if status != bridge.Status.OK:
        print(f"error: {bridge.get_last_error()}", file=sys.stderr)
        return 2
    try:
        n = int(np.prod(graph.input_shape))
        m = int(np.prod(graph.output_shape))
        rng = Xorshift64Star(args.seed)
        xs = rng.normal_array(n * args.batch)
        chunks = [int(tok) for tok in args.chunks.split(",") if tok.strip()]

        outputs = {}
        print("chunk\treps\ttotal_s\tper_batch_s\tper_column_us")
        for chunk in chunks:
            ys = np.empty(m * args.batch)
            elapsed = 0.0
            for _ in range(args.reps):
                t0 = time.perf_counter()
                st = bridge.model_forward_batch(
                    handle, xs, graph.input_shape, ys, graph.output_shape, args.batch, chunk
                )
                elapsed += time.perf_counter() - t0
                if st != bridge.Status.OK:
                    print(f"error: {bridge.get_last_error()}", file=sys.stderr)
                    return 2
            outputs[chunk] = ys.copy()
            per_batch = elapsed / args.reps
            per_col_us = 1e6 * per_batch / max(args.batch, 1)
            print(f"{chunk}\t{args.reps}\t{elapsed:.6f}\t{per_batch:.6f}\t{per_col_us:.3f}")

        baseline = outputs[chunks[0]]
        for chunk in chunks[1:]:
            if not np.array_equal(baseline, outputs[chunk]):
                print(f"error: chunk={chunk} output differs from chunk={chunks[0]}", file=sys.stderr)
                return 1
        print(f"chunk invariance: PASS ({len(chunks)} chunk sizes bit-identical)")
        return 0
    finally:
        bridge.model_delete(handle)


def cmd_fdvar(args: argparse.Namespace) -> int:
    graph = _load_or_exit(args.model)
    result = run_demo(graph, args.seed, args.iters)
    print("iter\tcost")
    for i, cost in enumerate(result.costs):
        print(f"{i}\t{cost:.17g}")
    initial = result.initial_cost if result.initial_cost > 0 else 1.0
    rel = result.final_cost / initial
    truth_norm = np.linalg.norm(result.truth)
    mismatch = np.linalg.norm(result.recovered - result.truth) / (truth_norm or 1.0)
    print(f"final/initial cost: {rel:.3e}")
    print(f"state mismatch vs truth: {mismatch:.3e}")
    return 0


def cmd_expected(args: argparse.Namespace) -> int:
    _load_or_exit(args.model)
    write_expected(args.model, args.seed, args.out, batch=args.batch)
    print(args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tnwp", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run tangent/adjoint consistency checks")
    p.add_argument("--model", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--json-out", default=None)
    p.add_argument("--fd-cap", type=int, default=DEFAULT_FD_CAP,
                   help="skip the FD Jacobian oracle when m*n exceeds this")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fixtures", help="write the golden model corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fixtures)

    p = sub.add_parser("bench", help="chunked-throughput measurement")
    p.add_argument("--model", required=True)
    p.add_argument("--batch", type=int, default=1000)
    p.add_argument("--chunks", default="1,64,512")
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("fdvar", help="toy variational-assimilation demo")
    p.add_argument("--model", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iters", type=int, default=200)
    p.set_defaults(func=cmd_fdvar)

    p = sub.add_parser("expected", help="emit expected-values file for host harnesses")
    p.add_argument("--model", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--batch", type=int, default=DEFAULT_BATCH)
    p.set_defaults(func=cmd_expected)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

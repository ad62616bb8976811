"""Expected-values files: labeled vectors a foreign host replays bit for bit.

One record per line:  <label> <count> <v1> ... <vcount>
Values are written with 17 significant digits, which round-trips float64
exactly through locale-independent decimal text. All buffers are in the
boundary's column-major order, so a host feeds the inputs straight through
the C interface and compares outputs with exact equality after parsing.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import bridge
from .prng import Xorshift64Star
from .serialize import load_model

HEADER_PREFIX = "# tnwp expected-values v1"
DEFAULT_BATCH = 3


def emit_expected(model_path: str | Path, seed: int, batch: int = DEFAULT_BATCH) -> str:
    """Run the boundary on seeded probes and render the expected file."""
    graph = load_model(model_path)
    status, handle = bridge.model_new(str(model_path), "cpu")
    if status != bridge.Status.OK:
        raise RuntimeError(f"cannot load {model_path}: {bridge.get_last_error()}")
    try:
        in_shape = graph.input_shape
        out_shape = graph.output_shape
        n = int(np.prod(in_shape))
        m = int(np.prod(out_shape))
        rng = Xorshift64Star(seed)

        x = rng.normal_array(n)
        dx = rng.normal_array(n)
        ystar = rng.normal_array(m)
        xs = rng.normal_array(n * batch)
        y = np.empty(m)
        dy = np.empty(m)
        xstar = np.empty(n)
        ys = np.empty(m * batch)

        for call, args in (
            (bridge.model_forward, (handle, x, in_shape, y, out_shape)),
            (bridge.model_tangent, (handle, x, in_shape, dx, in_shape, dy, out_shape)),
            (bridge.model_adjoint, (handle, x, in_shape, ystar, out_shape, xstar, in_shape)),
            (bridge.model_forward_batch, (handle, xs, in_shape, ys, out_shape, batch, 2)),
        ):
            st = call(*args)
            if st != bridge.Status.OK:
                raise RuntimeError(f"{call.__name__} failed: {bridge.get_last_error()}")
    finally:
        bridge.model_delete(handle)

    records = [
        ("in_shape", np.asarray(in_shape, dtype=np.float64)),
        ("out_shape", np.asarray(out_shape, dtype=np.float64)),
        ("batch", np.asarray([batch], dtype=np.float64)),
        ("x", x),
        ("y", y),
        ("dx", dx),
        ("dy", dy),
        ("ystar", ystar),
        ("xstar", xstar),
        ("xs", xs),
        ("ys", ys),
    ]
    lines = [f"{HEADER_PREFIX} model={Path(model_path).name} seed={seed}"]
    for label, values in records:
        rendered = " ".join(f"{v:.17g}" for v in values)
        lines.append(f"{label} {values.size} {rendered}")
    return "\n".join(lines) + "\n"


def write_expected(model_path: str | Path, seed: int, out_path: str | Path,
                   batch: int = DEFAULT_BATCH) -> None:
    Path(out_path).write_text(emit_expected(model_path, seed, batch), encoding="ascii")


def parse_expected(text: str) -> dict[str, np.ndarray]:
    """Inverse of emit_expected; used by tests to prove exact round-trips."""
    records: dict[str, np.ndarray] = {}
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split()
        label, count = parts[0], int(parts[1])
        values = np.array([float(tok) for tok in parts[2:]], dtype=np.float64)
        if values.size != count:
            raise ValueError(f"record {label!r}: declared {count} values, found {values.size}")
        records[label] = values
    return records

"""Golden fixture corpus: small models used by verification and the host harness."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .graph import ModelGraph, build_reference_gwd_model, validate_graph
from .layers import dense_layer, tanh_layer
from .prng import Xorshift64Star
from .serialize import save_model
from .tensor import Tensor

IDENTITY_SIZE = 4
DENSE_SIZE = 8
TANH_SIZES = (6, 10, 4)


def make_identity_model() -> ModelGraph:
    """Single dense layer with W = I, b = 0: forwards x to x."""
    eye = Tensor.from_array(np.eye(IDENTITY_SIZE))
    zero = Tensor.from_array(np.zeros(IDENTITY_SIZE))
    graph = ModelGraph(
        name="identity",
        input_shape=(IDENTITY_SIZE,),
        output_shape=(IDENTITY_SIZE,),
        layers=[dense_layer(eye, zero)],
    )
    validate_graph(graph)
    return graph


def make_dense_model(seed: int) -> ModelGraph:
    """Well-conditioned affine map W x + b with W near the identity.

    Kept deliberately mild (condition number well under 10) so plain
    gradient descent on the assimilation demo's quadratic cost converges
    to machine precision within its iteration budget.
    """
    rng = Xorshift64Star(seed)
    n = DENSE_SIZE
    w = np.eye(n) + rng.uniform_array(n * n, -0.1, 0.1).reshape(n, n)
    b = rng.uniform_array(n, -0.5, 0.5)
    graph = ModelGraph(
        name="dense",
        input_shape=(n,),
        output_shape=(n,),
        layers=[dense_layer(Tensor.from_array(w), Tensor.from_array(b))],
    )
    validate_graph(graph)
    return graph


def make_tanh_model(seed: int) -> ModelGraph:
    """Two-layer tanh net, smooth everywhere; the Taylor-order fixture."""
    rng = Xorshift64Star(seed)
    n_in, n_hidden, n_out = TANH_SIZES
    layers = []
    for m, n in ((n_hidden, n_in), (n_out, n_hidden)):
        s = 1.0 / np.sqrt(n)
        w = Tensor((m, n), rng.uniform_array(m * n, -s, s))
        b = Tensor((m,), rng.uniform_array(m, -s, s))
        layers.extend([dense_layer(w, b), tanh_layer()])
    graph = ModelGraph(
        name="tanh2",
        input_shape=(n_in,),
        output_shape=(n_out,),
        layers=layers,
    )
    validate_graph(graph)
    return graph


CORPUS_BUILDERS = {
    "identity": lambda seed: make_identity_model(),
    "dense": make_dense_model,
    "tanh2": make_tanh_model,
    "gwd_reference": build_reference_gwd_model,
}


def write_fixture_corpus(out_dir: str | Path, seed: int) -> list[Path]:
    """Write the four-fixture corpus; byte-identical for identical seeds."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, build in CORPUS_BUILDERS.items():
        path = out / f"{name}.tnwp"
        save_model(build(seed), path)
        written.append(path)
    return written

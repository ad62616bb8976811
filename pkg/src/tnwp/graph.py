"""Model graph: ordered layer chain, shape checking, and the reference topology.

A ModelGraph is immutable once built/loaded and shareable across threads;
nothing here touches parameter values except validation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeMismatchError, ValidationError
from .layers import (
    RULES,
    LayerSpec,
    broadcast_scalar_rows_layer,
    conv1d_layer,
    input_normalize_layer,
    output_denormalize_layer,
    residual_block_layer,
    split_heads_layer,
    validate_layer,
)
from .prng import Xorshift64Star
from .tensor import Tensor

FORMAT_VERSION = 1


@dataclass
class ModelGraph:
    name: str
    input_shape: tuple[int, ...]
    output_shape: tuple[int, ...]
    layers: list[LayerSpec] = field(default_factory=list)
    format_version: int = FORMAT_VERSION

    def __post_init__(self) -> None:
        self.input_shape = tuple(int(e) for e in self.input_shape)
        self.output_shape = tuple(int(e) for e in self.output_shape)


@dataclass
class NormalizationSpec:
    """Baked-in standardization stats: per-variable per-level on input,
    per-variable global on output."""

    input_mean: Tensor
    input_std: Tensor
    output_mean: Tensor
    output_std: Tensor

    def validate(self) -> None:
        if len(self.input_mean.shape) != 2 or self.input_mean.shape != self.input_std.shape:
            raise ValidationError("input stats must be matching (n_vars, n_levels) tensors")
        if len(self.output_mean.shape) != 1 or self.output_mean.shape != self.output_std.shape:
            raise ValidationError("output stats must be matching (n_out_vars,) tensors")
        if not np.all(self.input_std.data > 0.0) or not np.all(self.output_std.data > 0.0):
            raise ValidationError("std entries must be strictly positive")

    def entry_layer(self) -> LayerSpec:
        return input_normalize_layer(self.input_mean, self.input_std)

    def exit_layer(self) -> LayerSpec:
        return output_denormalize_layer(self.output_mean, self.output_std)


def check_shapes(graph: ModelGraph) -> list[tuple[int, ...]]:
    """Symbolic shape propagation; parameter values are never read.

    Returns the per-layer trace [input_shape, after layer 0, ...] and fails
    on the first inconsistent layer, naming its index. The terminal shape
    must equal the declared output shape.
    """
    trace = [graph.input_shape]
    shape = graph.input_shape
    for i, layer in enumerate(graph.layers):
        try:
            shape = RULES[layer.kind].out_shape(layer, shape)
        except ShapeMismatchError as exc:
            raise ShapeMismatchError(f"layer {i} ({layer.kind.value}): {exc}") from None
        trace.append(shape)
    if shape != graph.output_shape:
        raise ShapeMismatchError(
            f"layer chain terminates at {shape}, declared output shape is {graph.output_shape}"
        )
    return trace


def validate_graph(graph: ModelGraph) -> None:
    """All layer invariants plus finite parameters plus a passing shape trace."""
    for i, layer in enumerate(graph.layers):
        try:
            validate_layer(layer)
        except ValidationError as exc:
            raise ValidationError(f"layer {i} ({layer.kind.value}): {exc}") from None
        for name, t in layer.params.items():
            if not np.all(np.isfinite(t.data)):
                raise ValidationError(f"layer {i} ({layer.kind.value}): {name} has non-finite entries")
    check_shapes(graph)


def parameter_count(graph: ModelGraph) -> int:
    return sum(t.size for layer in graph.layers for t in layer.params.values())


# ---------------------------------------------------------------------------
# reference topology

_IN_VARS, _LEVELS = 11, 89
_OUT_VECTORS, _OUT_SCALARS = 3, 2
_CHANNELS = 16
_RES_KERNEL = 3


def _uniform_tensor(rng: Xorshift64Star, shape: tuple[int, ...], half_width: float) -> Tensor:
    n = int(np.prod(shape))
    return Tensor(shape, rng.uniform_array(n, -half_width, half_width))


def _stat_tensors(rng: Xorshift64Star, shape: tuple[int, ...]) -> tuple[Tensor, Tensor]:
    n = int(np.prod(shape))
    mean = Tensor(shape, rng.uniform_array(n, -1.0, 1.0))
    std = Tensor(shape, rng.uniform_array(n, 0.5, 1.5))
    return mean, std


def _init_conv(rng: Xorshift64Star, c_out: int, c_in: int, k: int) -> tuple[Tensor, Tensor]:
    s = 1.0 / np.sqrt(c_in * k)
    return _uniform_tensor(rng, (c_out, c_in, k), s), _uniform_tensor(rng, (c_out,), s)


def _init_dense(rng: Xorshift64Star, m: int, n: int) -> tuple[Tensor, Tensor]:
    s = 1.0 / np.sqrt(n)
    return _uniform_tensor(rng, (m, n), s), _uniform_tensor(rng, (m,), s)


def build_reference_gwd_model(seed: int) -> ModelGraph:
    """Reference column-surrogate topology with seeded parameters.

    Chain: per-variable per-level input standardization over (11, 89) ->
    kernel-1 stem conv lifting 11 channels to 16 -> two 16-channel residual
    blocks (two kernel-3 convs each, ReLU) -> kernel-3 conv reducing 16
    channels to 5 -> two parallel fully connected heads over the flattened
    features (3 vector rows of 89 levels, 2 scalars) -> scalar rows
    broadcast across all 89 levels -> per-variable global denormalization.
    Output is (5, 89); the two scalar rows are constant across levels
    before denormalization.

    Parameters are uniform in [-s, s] with s = 1/sqrt(fan_in), drawn from
    the seeded xorshift64* stream in layer order (weights row-major, then
    bias); normalization means are uniform in [-1, 1] and stds uniform in
    [0.5, 1.5], drawn first for the input stats and last for the output
    stats. Identical seeds produce identical graphs.
    """
    rng = Xorshift64Star(seed)
    n_out_vars = _OUT_VECTORS + _OUT_SCALARS
    flat_features = n_out_vars * _LEVELS

    in_mean, in_std = _stat_tensors(rng, (_IN_VARS, _LEVELS))
    stem_w, stem_b = _init_conv(rng, _CHANNELS, _IN_VARS, 1)
    res = []
    for _ in range(2):
        w1, b1 = _init_conv(rng, _CHANNELS, _CHANNELS, _RES_KERNEL)
        w2, b2 = _init_conv(rng, _CHANNELS, _CHANNELS, _RES_KERNEL)
        res.append(residual_block_layer(w1, b1, w2, b2, activation="relu"))
    reduce_w, reduce_b = _init_conv(rng, n_out_vars, _CHANNELS, _RES_KERNEL)
    vec_w, vec_b = _init_dense(rng, _OUT_VECTORS * _LEVELS, flat_features)
    sc_w, sc_b = _init_dense(rng, _OUT_SCALARS, flat_features)
    out_mean, out_std = _stat_tensors(rng, (n_out_vars,))

    norm = NormalizationSpec(in_mean, in_std, out_mean, out_std)
    norm.validate()

    graph = ModelGraph(
        name="gwd_reference",
        input_shape=(_IN_VARS, _LEVELS),
        output_shape=(n_out_vars, _LEVELS),
        layers=[
            norm.entry_layer(),
            conv1d_layer(stem_w, stem_b),
            res[0],
            res[1],
            conv1d_layer(reduce_w, reduce_b),
            split_heads_layer(
                vec_w, vec_b, sc_w, sc_b,
                vector_rows=_OUT_VECTORS, levels=_LEVELS, scalars=_OUT_SCALARS,
            ),
            broadcast_scalar_rows_layer(
                vector_rows=_OUT_VECTORS, levels=_LEVELS, scalars=_OUT_SCALARS
            ),
            norm.exit_layer(),
        ],
    )
    validate_graph(graph)
    return graph

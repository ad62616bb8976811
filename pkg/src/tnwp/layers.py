"""Layer catalog: parameter schema, validation, and per-kind rule triples.

The op set is a fixed sequential layer chain, so differentiation is done
with hand-written per-layer rules instead of a general tape: every kind
ships the triple (forward, jvp, vjp) plus a symbolic shape rule. The jvp
and vjp of each kind are exact linearizations at the cached input.

ReLU's derivative at exactly 0 is defined as 0 (one-sided subgradient),
which keeps all sweeps deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable

import numpy as np

from .errors import ShapeMismatchError, ValidationError
from .tensor import Tensor, _conv1d_raw, _dense_raw, _prod


class LayerKind(str, Enum):
    CONV1D = "conv1d"
    DENSE = "dense"
    RELU = "relu"
    TANH = "tanh"
    RESIDUAL_BLOCK = "residual_block"
    INPUT_NORMALIZE = "input_normalize"
    OUTPUT_DENORMALIZE = "output_denormalize"
    SPLIT_HEADS = "split_heads"
    BROADCAST_SCALAR_ROWS = "broadcast_scalar_rows"


@dataclass
class LayerSpec:
    """One layer: kind, named parameter tensors, and small integer/string meta."""

    kind: LayerKind
    params: dict[str, Tensor] = field(default_factory=dict)
    meta: dict[str, Any] = field(default_factory=dict)


_ACTIVATIONS = ("relu", "tanh")


# ---------------------------------------------------------------------------
# constructors


def conv1d_layer(weight: Tensor, bias: Tensor) -> LayerSpec:
    return LayerSpec(LayerKind.CONV1D, {"weight": weight, "bias": bias})


def dense_layer(weight: Tensor, bias: Tensor) -> LayerSpec:
    return LayerSpec(LayerKind.DENSE, {"weight": weight, "bias": bias})


def relu_layer() -> LayerSpec:
    return LayerSpec(LayerKind.RELU)


def tanh_layer() -> LayerSpec:
    return LayerSpec(LayerKind.TANH)


def input_normalize_layer(mean: Tensor, std: Tensor) -> LayerSpec:
    """Per-variable per-level standardization: (x - mean) / std, stats shaped (C, L)."""
    return LayerSpec(LayerKind.INPUT_NORMALIZE, {"mean": mean, "std": std})


def output_denormalize_layer(mean: Tensor, std: Tensor) -> LayerSpec:
    """Per-variable global de-standardization: x * std[v] + mean[v], stats shaped (V,)."""
    return LayerSpec(LayerKind.OUTPUT_DENORMALIZE, {"mean": mean, "std": std})


def residual_block_layer(
    conv1_weight: Tensor,
    conv1_bias: Tensor,
    conv2_weight: Tensor,
    conv2_bias: Tensor,
    activation: str = "relu",
) -> LayerSpec:
    """Skip block: x + act(conv2(act(conv1(x)))); channel counts must match x."""
    return LayerSpec(
        LayerKind.RESIDUAL_BLOCK,
        {
            "conv1_weight": conv1_weight,
            "conv1_bias": conv1_bias,
            "conv2_weight": conv2_weight,
            "conv2_bias": conv2_bias,
        },
        {"activation": activation},
    )


def split_heads_layer(
    vector_weight: Tensor,
    vector_bias: Tensor,
    scalar_weight: Tensor,
    scalar_bias: Tensor,
    vector_rows: int,
    levels: int,
    scalars: int,
) -> LayerSpec:
    """Two parallel affine heads over the flattened input.

    The vector head emits vector_rows * levels values, the scalar head
    emits `scalars` values; the output is their flat concatenation.
    """
    return LayerSpec(
        LayerKind.SPLIT_HEADS,
        {
            "vector_weight": vector_weight,
            "vector_bias": vector_bias,
            "scalar_weight": scalar_weight,
            "scalar_bias": scalar_bias,
        },
        {"vector_rows": vector_rows, "levels": levels, "scalars": scalars},
    )


def broadcast_scalar_rows_layer(vector_rows: int, levels: int, scalars: int) -> LayerSpec:
    """Unpack head output: vector part reshaped to rows, scalars repeated per level."""
    return LayerSpec(
        LayerKind.BROADCAST_SCALAR_ROWS,
        {},
        {"vector_rows": vector_rows, "levels": levels, "scalars": scalars},
    )


# ---------------------------------------------------------------------------
# validation


def validate_layer(spec: LayerSpec) -> None:
    """Check kind-specific structural invariants; raises ValidationError."""
    kind = spec.kind
    if kind == LayerKind.CONV1D:
        w, b = _req(spec, "weight"), _req(spec, "bias")
        if len(w.shape) != 3:
            raise ValidationError(f"conv1d weight must be rank 3, got {w.shape}")
        if w.shape[2] % 2 != 1:
            raise ValidationError(f"conv1d kernel size must be odd, got {w.shape[2]}")
        if b.shape != (w.shape[0],):
            raise ValidationError(f"conv1d bias shape {b.shape} != ({w.shape[0]},)")
    elif kind == LayerKind.DENSE:
        w, b = _req(spec, "weight"), _req(spec, "bias")
        if len(w.shape) != 2:
            raise ValidationError(f"dense weight must be rank 2, got {w.shape}")
        if b.shape != (w.shape[0],):
            raise ValidationError(f"dense bias shape {b.shape} != ({w.shape[0]},)")
    elif kind in (LayerKind.RELU, LayerKind.TANH):
        if spec.params:
            raise ValidationError(f"{kind.value} takes no parameters")
    elif kind == LayerKind.INPUT_NORMALIZE:
        mean, std = _req(spec, "mean"), _req(spec, "std")
        if len(mean.shape) != 2 or mean.shape != std.shape:
            raise ValidationError(
                f"input stats must be matching rank-2 tensors, got {mean.shape} / {std.shape}"
            )
        _positive_std(std)
    elif kind == LayerKind.OUTPUT_DENORMALIZE:
        mean, std = _req(spec, "mean"), _req(spec, "std")
        if len(mean.shape) != 1 or mean.shape != std.shape:
            raise ValidationError(
                f"output stats must be matching rank-1 tensors, got {mean.shape} / {std.shape}"
            )
        _positive_std(std)
    elif kind == LayerKind.RESIDUAL_BLOCK:
        w1, w2 = _req(spec, "conv1_weight"), _req(spec, "conv2_weight")
        b1, b2 = _req(spec, "conv1_bias"), _req(spec, "conv2_bias")
        for w, b, tag in ((w1, b1, "conv1"), (w2, b2, "conv2")):
            if len(w.shape) != 3:
                raise ValidationError(f"residual {tag} weight must be rank 3, got {w.shape}")
            if w.shape[2] % 2 != 1:
                raise ValidationError(f"residual {tag} kernel size must be odd, got {w.shape[2]}")
            if b.shape != (w.shape[0],):
                raise ValidationError(f"residual {tag} bias shape {b.shape} != ({w.shape[0]},)")
        if w1.shape[0] != w2.shape[1]:
            raise ValidationError("residual conv1 output channels must feed conv2 input")
        if w2.shape[0] != w1.shape[1]:
            raise ValidationError(
                "residual input/output channel counts differ; skip-add is ill-formed"
            )
        if spec.meta.get("activation") not in _ACTIVATIONS:
            raise ValidationError(f"residual activation must be one of {_ACTIVATIONS}")
    elif kind == LayerKind.SPLIT_HEADS:
        vw, vb = _req(spec, "vector_weight"), _req(spec, "vector_bias")
        sw, sb = _req(spec, "scalar_weight"), _req(spec, "scalar_bias")
        v, lv, s = (int(spec.meta.get(k, 0)) for k in ("vector_rows", "levels", "scalars"))
        if v <= 0 or lv <= 0 or s <= 0:
            raise ValidationError("split_heads meta must carry positive vector_rows/levels/scalars")
        if len(vw.shape) != 2 or vw.shape[0] != v * lv:
            raise ValidationError(f"vector head weight {vw.shape} != ({v * lv}, n)")
        if sw.shape != (s, vw.shape[1]):
            raise ValidationError(f"scalar head weight {sw.shape} != ({s}, {vw.shape[1]})")
        if vb.shape != (v * lv,) or sb.shape != (s,):
            raise ValidationError("head bias shapes do not match head widths")
    elif kind == LayerKind.BROADCAST_SCALAR_ROWS:
        v, lv, s = (int(spec.meta.get(k, 0)) for k in ("vector_rows", "levels", "scalars"))
        if v <= 0 or lv <= 0 or s <= 0:
            raise ValidationError(
                "broadcast_scalar_rows meta must carry positive vector_rows/levels/scalars"
            )
    else:  # pragma: no cover - enum is closed
        raise ValidationError(f"unknown layer kind {kind!r}")


def _req(spec: LayerSpec, name: str) -> Tensor:
    try:
        return spec.params[name]
    except KeyError:
        raise ValidationError(f"{spec.kind.value} is missing parameter {name!r}") from None


def _positive_std(std: Tensor) -> None:
    if not np.all(std.data > 0.0):
        raise ValidationError("std entries must be strictly positive")


# ---------------------------------------------------------------------------
# activation helpers


def _act_forward(name: str, u: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
    if name == "relu":
        return np.maximum(u, 0.0), None
    t = np.tanh(u)
    return t, t


def _act_deriv(name: str, u: np.ndarray, cache: np.ndarray | None) -> np.ndarray:
    if name == "relu":
        return (u > 0.0).astype(np.float64)
    t = cache if cache is not None else np.tanh(u)
    return 1.0 - t * t


# ---------------------------------------------------------------------------
# rule triples


@dataclass(frozen=True)
class LayerRules:
    forward: Callable[[LayerSpec, np.ndarray], tuple[np.ndarray, Any]]
    jvp: Callable[[LayerSpec, np.ndarray, Any, np.ndarray], np.ndarray]
    vjp: Callable[[LayerSpec, np.ndarray, Any, np.ndarray], np.ndarray]
    out_shape: Callable[[LayerSpec, tuple[int, ...]], tuple[int, ...]]
    relu_margin: Callable[[LayerSpec, np.ndarray, Any], float | None] | None = None


def _conv_forward(spec, x):
    w = spec.params["weight"].as_array()
    b = spec.params["bias"].data
    return _conv1d_raw(x, w, b), None


def _conv_jvp(spec, x, aux, dx):
    w = spec.params["weight"].as_array()
    return _conv1d_raw(dx, w, np.zeros(w.shape[0]))


def _conv_transpose_kernel(w: np.ndarray) -> np.ndarray:
    # Swap channel axes and flip the tap axis: the VJP of a same-padded
    # correlation is a same-padded correlation with this kernel.
    return np.ascontiguousarray(w.transpose(1, 0, 2)[:, :, ::-1])


def _conv_vjp(spec, x, aux, gy):
    w = spec.params["weight"].as_array()
    return _conv1d_raw(gy, _conv_transpose_kernel(w), np.zeros(w.shape[1]))


def _conv_shape(spec, in_shape):
    w = spec.params["weight"]
    if len(in_shape) != 2 or in_shape[0] != w.shape[1]:
        raise ShapeMismatchError(
            f"conv1d expects ({w.shape[1]}, L) input, got {in_shape}"
        )
    return (w.shape[0], in_shape[1])


def _dense_forward(spec, x):
    return _dense_raw(x, spec.params["weight"].as_array(), spec.params["bias"].data), None


def _dense_jvp(spec, x, aux, dx):
    return np.einsum("mn,n->m", spec.params["weight"].as_array(), dx)


def _dense_vjp(spec, x, aux, gy):
    return np.einsum("mn,m->n", spec.params["weight"].as_array(), gy)


def _dense_shape(spec, in_shape):
    w = spec.params["weight"]
    if in_shape != (w.shape[1],):
        raise ShapeMismatchError(f"dense expects ({w.shape[1]},) input, got {in_shape}")
    return (w.shape[0],)


def _relu_forward(spec, x):
    return np.maximum(x, 0.0), None


def _relu_jvp(spec, x, aux, dx):
    return dx * (x > 0.0)


def _relu_margin(spec, x, aux):
    return float(np.min(np.abs(x)))


def _tanh_forward(spec, x):
    t = np.tanh(x)
    return t, t


def _tanh_jvp(spec, x, aux, dx):
    t = aux if aux is not None else np.tanh(x)
    return dx * (1.0 - t * t)


def _elementwise_shape(spec, in_shape):
    return in_shape


def _innorm_forward(spec, x):
    return (x - spec.params["mean"].as_array()) / spec.params["std"].as_array(), None


def _innorm_jvp(spec, x, aux, dx):
    return dx / spec.params["std"].as_array()


def _innorm_shape(spec, in_shape):
    stats = spec.params["mean"].shape
    if in_shape != stats:
        raise ShapeMismatchError(f"input_normalize stats are {stats}, input is {in_shape}")
    return in_shape


def _outdenorm_forward(spec, x):
    std = spec.params["std"].data
    mean = spec.params["mean"].data
    return x * std[:, None] + mean[:, None], None


def _outdenorm_jvp(spec, x, aux, dx):
    return dx * spec.params["std"].data[:, None]


def _outdenorm_shape(spec, in_shape):
    n_vars = spec.params["mean"].shape[0]
    if len(in_shape) != 2 or in_shape[0] != n_vars:
        raise ShapeMismatchError(
            f"output_denormalize expects ({n_vars}, L) input, got {in_shape}"
        )
    return in_shape


def _residual_forward(spec, x):
    act = spec.meta["activation"]
    w1 = spec.params["conv1_weight"].as_array()
    b1 = spec.params["conv1_bias"].data
    w2 = spec.params["conv2_weight"].as_array()
    b2 = spec.params["conv2_bias"].data
    u1 = _conv1d_raw(x, w1, b1)
    a1, t1 = _act_forward(act, u1)
    u2 = _conv1d_raw(a1, w2, b2)
    a2, t2 = _act_forward(act, u2)
    return x + a2, (u1, t1, u2, t2)


def _residual_jvp(spec, x, aux, dx):
    act = spec.meta["activation"]
    u1, t1, u2, t2 = aux
    w1 = spec.params["conv1_weight"].as_array()
    w2 = spec.params["conv2_weight"].as_array()
    du1 = _conv1d_raw(dx, w1, np.zeros(w1.shape[0]))
    da1 = du1 * _act_deriv(act, u1, t1)
    du2 = _conv1d_raw(da1, w2, np.zeros(w2.shape[0]))
    da2 = du2 * _act_deriv(act, u2, t2)
    return dx + da2


def _residual_vjp(spec, x, aux, gy):
    act = spec.meta["activation"]
    u1, t1, u2, t2 = aux
    w1 = spec.params["conv1_weight"].as_array()
    w2 = spec.params["conv2_weight"].as_array()
    gu2 = gy * _act_deriv(act, u2, t2)
    ga1 = _conv1d_raw(gu2, _conv_transpose_kernel(w2), np.zeros(w2.shape[1]))
    gu1 = ga1 * _act_deriv(act, u1, t1)
    gx = _conv1d_raw(gu1, _conv_transpose_kernel(w1), np.zeros(w1.shape[1]))
    return gy + gx


def _residual_shape(spec, in_shape):
    w1 = spec.params["conv1_weight"]
    if len(in_shape) != 2 or in_shape[0] != w1.shape[1]:
        raise ShapeMismatchError(
            f"residual block expects ({w1.shape[1]}, L) input, got {in_shape}"
        )
    return in_shape


def _residual_margin(spec, x, aux):
    if spec.meta["activation"] != "relu":
        return None
    u1, _, u2, _ = aux
    return float(min(np.min(np.abs(u1)), np.min(np.abs(u2))))


def _split_forward(spec, x):
    flat = x.ravel()
    vec = _dense_raw(flat, spec.params["vector_weight"].as_array(), spec.params["vector_bias"].data)
    sc = _dense_raw(flat, spec.params["scalar_weight"].as_array(), spec.params["scalar_bias"].data)
    return np.concatenate([vec, sc]), None


def _split_jvp(spec, x, aux, dx):
    flat = dx.ravel()
    vec = np.einsum("mn,n->m", spec.params["vector_weight"].as_array(), flat)
    sc = np.einsum("mn,n->m", spec.params["scalar_weight"].as_array(), flat)
    return np.concatenate([vec, sc])


def _split_vjp(spec, x, aux, gy):
    n_vec = spec.params["vector_weight"].shape[0]
    gvec, gsc = gy[:n_vec], gy[n_vec:]
    gflat = np.einsum("mn,m->n", spec.params["vector_weight"].as_array(), gvec)
    gflat += np.einsum("mn,m->n", spec.params["scalar_weight"].as_array(), gsc)
    return gflat.reshape(x.shape)


def _split_shape(spec, in_shape):
    n = spec.params["vector_weight"].shape[1]
    if _prod(in_shape) != n:
        raise ShapeMismatchError(
            f"split_heads expects {n} flattened inputs, got {in_shape} = {_prod(in_shape)}"
        )
    return (spec.params["vector_weight"].shape[0] + spec.params["scalar_weight"].shape[0],)


def _broadcast_forward(spec, x):
    v, lv, s = (int(spec.meta[k]) for k in ("vector_rows", "levels", "scalars"))
    out = np.empty((v + s, lv), dtype=np.float64)
    out[:v] = x[: v * lv].reshape(v, lv)
    out[v:] = np.repeat(x[v * lv :][:, None], lv, axis=1)
    return out, None


def _broadcast_jvp(spec, x, aux, dx):
    return _broadcast_forward(spec, dx)[0]


def _broadcast_vjp(spec, x, aux, gy):
    v, lv, s = (int(spec.meta[k]) for k in ("vector_rows", "levels", "scalars"))
    gx = np.empty(v * lv + s, dtype=np.float64)
    gx[: v * lv] = gy[:v].ravel()
    gx[v * lv :] = gy[v:].sum(axis=1)
    return gx


def _broadcast_shape(spec, in_shape):
    v, lv, s = (int(spec.meta[k]) for k in ("vector_rows", "levels", "scalars"))
    if in_shape != (v * lv + s,):
        raise ShapeMismatchError(
            f"broadcast_scalar_rows expects ({v * lv + s},) input, got {in_shape}"
        )
    return (v + s, lv)


RULES: dict[LayerKind, LayerRules] = {
    LayerKind.CONV1D: LayerRules(_conv_forward, _conv_jvp, _conv_vjp, _conv_shape),
    LayerKind.DENSE: LayerRules(_dense_forward, _dense_jvp, _dense_vjp, _dense_shape),
    LayerKind.RELU: LayerRules(
        _relu_forward, _relu_jvp, _relu_jvp, _elementwise_shape, _relu_margin
    ),
    LayerKind.TANH: LayerRules(_tanh_forward, _tanh_jvp, _tanh_jvp, _elementwise_shape),
    LayerKind.RESIDUAL_BLOCK: LayerRules(
        _residual_forward, _residual_jvp, _residual_vjp, _residual_shape, _residual_margin
    ),
    LayerKind.INPUT_NORMALIZE: LayerRules(
        _innorm_forward, _innorm_jvp, _innorm_jvp, _innorm_shape
    ),
    LayerKind.OUTPUT_DENORMALIZE: LayerRules(
        _outdenorm_forward, _outdenorm_jvp, _outdenorm_jvp, _outdenorm_shape
    ),
    LayerKind.SPLIT_HEADS: LayerRules(_split_forward, _split_jvp, _split_vjp, _split_shape),
    LayerKind.BROADCAST_SCALAR_ROWS: LayerRules(
        _broadcast_forward, _broadcast_jvp, _broadcast_vjp, _broadcast_shape
    ),
}


def is_smooth(spec: LayerSpec) -> bool:
    """True when the layer has no ReLU kink anywhere."""
    if spec.kind == LayerKind.RELU:
        return False
    if spec.kind == LayerKind.RESIDUAL_BLOCK:
        return spec.meta.get("activation") != "relu"
    return True

"""Forward inference plus tangent-linear (JVP) and adjoint (VJP) sweeps.

A forward pass records each layer's input activation in a ForwardTrace;
tangent and adjoint evaluations replay the trace layer by layer without
ever materializing the Jacobian. Traces are immutable, repeatable and
side-effect free, so any number of sweeps may share one trace, including
concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import ShapeMismatchError, UsageError, ValidationError
from .graph import ModelGraph
from .layers import RULES, LayerSpec
from .tensor import Tensor


@dataclass(frozen=True)
class TraceEntry:
    layer: LayerSpec
    x: np.ndarray
    aux: Any


@dataclass(frozen=True)
class ForwardTrace:
    """Linearization point: per-layer cached inputs for one (graph, x) pair."""

    graph: ModelGraph
    entries: tuple[TraceEntry, ...]
    x: Tensor
    y: Tensor

    def _check(self) -> None:
        if len(self.entries) != len(self.graph.layers):
            raise UsageError(
                f"trace has {len(self.entries)} entries for {len(self.graph.layers)} layers"
            )
        for i, (entry, layer) in enumerate(zip(self.entries, self.graph.layers)):
            if entry.layer is not layer:
                raise UsageError(f"trace entry {i} is bound to a different layer")


@dataclass(frozen=True)
class JacobianMatrix:
    """Dense (m, n) matrix of output/input partials at one linearization point.

    Row p corresponds to flat row-major output index p, column q to flat
    input index q; the coordinate maps recover (variable, level) indices.
    """

    matrix: np.ndarray
    input_shape: tuple[int, ...]
    output_shape: tuple[int, ...]

    def row_coords(self, p: int) -> tuple[int, ...]:
        return tuple(int(c) for c in np.unravel_index(p, self.output_shape))

    def col_coords(self, q: int) -> tuple[int, ...]:
        return tuple(int(c) for c in np.unravel_index(q, self.input_shape))


def forward(graph: ModelGraph, x: Tensor) -> tuple[Tensor, ForwardTrace]:
    """Run the layer chain; returns the output and the trace for later sweeps.

    Repeated calls on identical inputs are bit-identical.
    """
    if x.shape != graph.input_shape:
        raise ShapeMismatchError(
            f"input shape {x.shape} != model input shape {graph.input_shape}"
        )
    if not np.all(np.isfinite(x.data)):
        raise ValidationError("input contains non-finite values")

    a = x.as_array()
    entries = []
    for layer in graph.layers:
        out, aux = RULES[layer.kind].forward(layer, a)
        entries.append(TraceEntry(layer, a, aux))
        a = out
    y = Tensor.from_array(a if entries else a.copy())
    if y.shape != graph.output_shape:
        raise ShapeMismatchError(
            f"layer chain produced {y.shape}, declared output shape is {graph.output_shape}"
        )
    return y, ForwardTrace(graph, tuple(entries), x, y)


def tangent(trace: ForwardTrace, dx: Tensor) -> Tensor:
    """Tangent-linear sweep: dy = J dx at the trace's linearization point.

    Exactly linear in dx; J is never formed.
    """
    trace._check()
    if dx.shape != trace.graph.input_shape:
        raise ShapeMismatchError(
            f"perturbation shape {dx.shape} != model input shape {trace.graph.input_shape}"
        )
    d = dx.as_array()
    for entry in trace.entries:
        d = RULES[entry.layer.kind].jvp(entry.layer, entry.x, entry.aux, d)
    return Tensor.from_array(d if trace.entries else d.copy())


def adjoint(trace: ForwardTrace, ystar: Tensor) -> Tensor:
    """Adjoint sweep: xstar = J^T ystar via reverse replay of the trace.

    Semantically this is the gradient with respect to the trace input of
    the scalar <y, ystar>. Exactly linear in ystar.
    """
    trace._check()
    if ystar.shape != trace.graph.output_shape:
        raise ShapeMismatchError(
            f"adjoint seed shape {ystar.shape} != model output shape {trace.graph.output_shape}"
        )
    g = ystar.as_array()
    for entry in reversed(trace.entries):
        g = RULES[entry.layer.kind].vjp(entry.layer, entry.x, entry.aux, g)
    return Tensor.from_array(g if trace.entries else g.copy())


def jacobian(graph: ModelGraph, x: Tensor) -> JacobianMatrix:
    """Assemble the dense Jacobian from min(m, n) sweeps.

    Rows come from adjoint sweeps with unit output seeds when m <= n,
    otherwise columns come from tangent sweeps with unit input seeds.
    """
    y, trace = forward(graph, x)
    n = x.size
    m = y.size
    mat = np.empty((m, n), dtype=np.float64)
    if m <= n:
        for p in range(m):
            seed = np.zeros(m)
            seed[p] = 1.0
            mat[p, :] = adjoint(trace, Tensor(graph.output_shape, seed)).data
    else:
        for q in range(n):
            seed = np.zeros(n)
            seed[q] = 1.0
            mat[:, q] = tangent(trace, Tensor(graph.input_shape, seed)).data
    return JacobianMatrix(mat, graph.input_shape, graph.output_shape)


def scalar_loss_adjoint(graph: ModelGraph, x0: Tensor, z: Tensor) -> tuple[float, Tensor]:
    """Scalar-product path: k = <M(x0), z> and its gradient xstar = J^T z.

    This is the gradient kernel the assimilation demo minimizes with.
    """
    y, trace = forward(graph, x0)
    if z.shape != graph.output_shape:
        raise ShapeMismatchError(
            f"adjoint variable shape {z.shape} != model output shape {graph.output_shape}"
        )
    k = float(np.dot(y.data, z.data))
    return k, adjoint(trace, z)

"""Handle-based coupling boundary.

This module is the in-process, flat-data contract a foreign host calls:
opaque integer handles, integer status codes (no exception ever crosses),
column-major buffers with explicit extents, chunked batch execution and
instant resource release. The exported C symbol set in the shared library
is a thin veneer over these functions (see tnwp.embed).

Buffers are 1-D float64 numpy arrays holding column-major data; float32
input buffers are widened on entry and output buffers of float32 are
narrowed on exit. Output buffers are written only on a zero status.

Diagnostics: set TNWP_LOG=error or TNWP_LOG=debug to trace calls on
standard error; the default is off.
"""

from __future__ import annotations

import os
import sys
import threading
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .engine import adjoint, forward, tangent
from .errors import FormatError, ShapeMismatchError, ValidationError
from .graph import ModelGraph
from .serialize import load_model
from .tensor import colmajor_to_rowmajor, rowmajor_to_colmajor


class Status(IntEnum):
    OK = 0
    BAD_HANDLE = 1
    SHAPE_MISMATCH = 2
    IO_ERROR = 3
    DEVICE_UNAVAILABLE = 4
    INVALID_ARGUMENT = 5
    INTERNAL_ERROR = 6


_DEVICES = ("cpu", "gpu")
_ID_MASK = (1 << 32) - 1


@dataclass
class _Slot:
    generation: int
    graph: ModelGraph
    device: str


class HandleRegistry:
    """Maps live handle ids to loaded models; deletion is immediate.

    Freed ids may be reissued with a bumped generation, so a stale
    (id, generation) token never validates again.
    """

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._slots: dict[int, _Slot] = {}
        self._free: list[tuple[int, int]] = []
        self._next_id = 1

    def insert(self, graph: ModelGraph, device: str) -> int:
        with self._lock:
            if self._free:
                handle_id, generation = self._free.pop()
            else:
                handle_id, generation = self._next_id, 0
                self._next_id += 1
            self._slots[handle_id] = _Slot(generation, graph, device)
            return (generation << 32) | handle_id

    def lookup(self, token: int) -> _Slot | None:
        if not isinstance(token, int) or token <= 0:
            return None
        handle_id, generation = token & _ID_MASK, token >> 32
        with self._lock:
            slot = self._slots.get(handle_id)
            if slot is None or slot.generation != generation:
                return None
            return slot

    def remove(self, token: int) -> bool:
        if not isinstance(token, int) or token <= 0:
            return False
        handle_id, generation = token & _ID_MASK, token >> 32
        with self._lock:
            slot = self._slots.get(handle_id)
            if slot is None or slot.generation != generation:
                return False
            del self._slots[handle_id]
            self._free.append((handle_id, generation + 1))
            return True

    def live_count(self) -> int:
        with self._lock:
            return len(self._slots)


_registry = HandleRegistry()
_tls = threading.local()


def live_model_count() -> int:
    """Introspection probe: number of currently live models."""
    return _registry.live_count()


def get_last_error() -> str:
    """Thread-local description of the most recent non-zero status ('' after success)."""
    return getattr(_tls, "detail", "")


def last_error_detail(capacity: int) -> bytes:
    """NUL-terminated, capacity-truncated rendering of the thread-local detail."""
    if capacity <= 0:
        return b""
    msg = get_last_error().encode("utf-8")[: capacity - 1]
    return msg + b"\x00"


def _log_level() -> int:
    level = os.environ.get("TNWP_LOG", "off").lower()
    return {"debug": 2, "error": 1}.get(level, 0)


def _finish(call: str, status: Status, detail: str = "") -> Status:
    _tls.detail = detail if status != Status.OK else ""
    level = _log_level()
    if level >= 2 or (level >= 1 and status != Status.OK):
        print(f"tnwp: {call} -> {status.name} {detail}".rstrip(), file=sys.stderr)
    return status


def _as_flat(buffer, name: str) -> np.ndarray:
    arr = np.asarray(buffer)
    if arr.dtype == np.float32:
        arr = arr.astype(np.float64)
    if arr.dtype != np.float64:
        raise ValidationError(f"{name} buffer must be float64 (or float32 for ingest)")
    return arr.ravel()

def _check_extents(name: str, extents, expected: tuple[int, ...]) -> None:
    extents = tuple(int(e) for e in extents)
    if len(extents) != len(expected):
        raise ShapeMismatchError(
            f"{name} rank {len(extents)} != expected rank {len(expected)}"
        )
    for dim, (got, want) in enumerate(zip(extents, expected)):
        if got != want:
            raise ShapeMismatchError(
                f"{name} extent mismatch at dimension {dim}: expected {want}, got {got}"
            )


def _check_length(name: str, arr: np.ndarray, count: int) -> None:
    if arr.size != count:
        raise ShapeMismatchError(f"{name} buffer has {arr.size} elements, expected {count}")


def model_new(path: str, device: str) -> tuple[Status, int]:
    """Load a model container and register it; returns (status, handle).

    The handle is 0 unless the status is OK. Device "cpu" is the only
    implemented backend; "gpu" is reserved vocabulary and reports
    device-unavailable rather than invalid-argument.
    """
    try:
        if not isinstance(device, str) or device not in _DEVICES:
            return _finish("model_new", Status.INVALID_ARGUMENT, f"unknown device {device!r}"), 0
        if device == "gpu":
            return _finish(
                "model_new", Status.DEVICE_UNAVAILABLE,
                "device 'gpu' is accepted vocabulary but no gpu backend is built",
            ), 0
        try:
            graph = load_model(path)
        except OSError as exc:
            return _finish("model_new", Status.IO_ERROR, f"cannot read {path!r}: {exc}"), 0
        except (FormatError, ValidationError, ShapeMismatchError) as exc:
            return _finish("model_new", Status.IO_ERROR, f"cannot load {path!r}: {exc}"), 0
        token = _registry.insert(graph, device)
        return _finish("model_new", Status.OK), token
    except Exception as exc:  # status totality: nothing may cross the boundary
        return _finish("model_new", Status.INTERNAL_ERROR, repr(exc)), 0


def model_forward(handle: int, x, x_extents, y, y_extents) -> Status:
    """y := column-major forward(x); y is untouched on any non-zero status."""
    try:
        slot = _registry.lookup(handle)
        if slot is None:
            return _finish("model_forward", Status.BAD_HANDLE, f"stale or unknown handle {handle}")
        graph = slot.graph
        try:
            xb = _as_flat(x, "x")
            _check_extents("x", x_extents, graph.input_shape)
            _check_extents("y", y_extents, graph.output_shape)
            _check_length("x", xb, int(np.prod(graph.input_shape)))
            _check_length("y", np.asarray(y), int(np.prod(graph.output_shape)))
            xt = colmajor_to_rowmajor(xb, graph.input_shape)
            yt, _ = forward(graph, xt)
        except ShapeMismatchError as exc:
            return _finish("model_forward", Status.SHAPE_MISMATCH, str(exc))
        except ValidationError as exc:
            return _finish("model_forward", Status.INVALID_ARGUMENT, str(exc))
        np.asarray(y)[:] = rowmajor_to_colmajor(yt)
        return _finish("model_forward", Status.OK)
    except Exception as exc:
        return _finish("model_forward", Status.INTERNAL_ERROR, repr(exc))


def model_tangent(handle: int, x, x_extents, dx, dx_extents, dy, dy_extents) -> Status:
    """dy := J dx at linearization point x, all buffers column-major."""
    try:
        slot = _registry.lookup(handle)
        if slot is None:
            return _finish("model_tangent", Status.BAD_HANDLE, f"stale or unknown handle {handle}")
        graph = slot.graph
        try:
            xb = _as_flat(x, "x")
            dxb = _as_flat(dx, "dx")
            _check_extents("x", x_extents, graph.input_shape)
            _check_extents("dx", dx_extents, graph.input_shape)
            _check_extents("dy", dy_extents, graph.output_shape)
            _check_length("x", xb, int(np.prod(graph.input_shape)))
            _check_length("dx", dxb, int(np.prod(graph.input_shape)))
            _check_length("dy", np.asarray(dy), int(np.prod(graph.output_shape)))
            _, trace = forward(graph, colmajor_to_rowmajor(xb, graph.input_shape))
            dyt = tangent(trace, colmajor_to_rowmajor(dxb, graph.input_shape))
        except ShapeMismatchError as exc:
            return _finish("model_tangent", Status.SHAPE_MISMATCH, str(exc))
        except ValidationError as exc:
            return _finish("model_tangent", Status.INVALID_ARGUMENT, str(exc))
        np.asarray(dy)[:] = rowmajor_to_colmajor(dyt)
        return _finish("model_tangent", Status.OK)
    except Exception as exc:
        return _finish("model_tangent", Status.INTERNAL_ERROR, repr(exc))


def model_adjoint(handle: int, x, x_extents, ystar, ystar_extents, xstar, xstar_extents) -> Status:
    """xstar := J^T ystar at linearization point x, all buffers column-major."""
    try:
        slot = _registry.lookup(handle)
        if slot is None:
            return _finish("model_adjoint", Status.BAD_HANDLE, f"stale or unknown handle {handle}")
        graph = slot.graph
        try:
            xb = _as_flat(x, "x")
            yb = _as_flat(ystar, "ystar")
            _check_extents("x", x_extents, graph.input_shape)
            _check_extents("ystar", ystar_extents, graph.output_shape)
            _check_extents("xstar", xstar_extents, graph.input_shape)
            _check_length("x", xb, int(np.prod(graph.input_shape)))
            _check_length("ystar", yb, int(np.prod(graph.output_shape)))
            _check_length("xstar", np.asarray(xstar), int(np.prod(graph.input_shape)))
            _, trace = forward(graph, colmajor_to_rowmajor(xb, graph.input_shape))
            xst = adjoint(trace, colmajor_to_rowmajor(yb, graph.output_shape))
        except ShapeMismatchError as exc:
            return _finish("model_adjoint", Status.SHAPE_MISMATCH, str(exc))
        except ValidationError as exc:
            return _finish("model_adjoint", Status.INVALID_ARGUMENT, str(exc))
        np.asarray(xstar)[:] = rowmajor_to_colmajor(xst)
        return _finish("model_adjoint", Status.OK)
    except Exception as exc:
        return _finish("model_adjoint", Status.INTERNAL_ERROR, repr(exc))


def model_forward_batch(handle: int, xs, x_extents, ys, y_extents, batch: int, chunk: int) -> Status:
    """Forward over `batch` columns appended along the last (column-major) axis.

    Columns are processed in blocks of at most `chunk`; every column's data
    is contiguous in the host buffer, so results are bit-identical for any
    chunk value. batch=0 succeeds without touching ys.
    """
    try:
        slot = _registry.lookup(handle)
        if slot is None:
            return _finish(
                "model_forward_batch", Status.BAD_HANDLE, f"stale or unknown handle {handle}"
            )
        graph = slot.graph
        try:
            batch = int(batch)
            chunk = int(chunk)
            if chunk < 1:
                return _finish(
                    "model_forward_batch", Status.INVALID_ARGUMENT, f"chunk must be >= 1, got {chunk}"
                )
            if batch < 0:
                return _finish(
                    "model_forward_batch", Status.INVALID_ARGUMENT, f"batch must be >= 0, got {batch}"
                )
            if batch == 0:
                return _finish("model_forward_batch", Status.OK)
            xsb = _as_flat(xs, "xs")
            _check_extents("xs", x_extents, graph.input_shape)
            _check_extents("ys", y_extents, graph.output_shape)
            n_in = int(np.prod(graph.input_shape))
            n_out = int(np.prod(graph.output_shape))
            _check_length("xs", xsb, n_in * batch)
            ysb = np.asarray(ys)
            _check_length("ys", ysb, n_out * batch)
            if not np.all(np.isfinite(xsb)):
                return _finish(
                    "model_forward_batch", Status.INVALID_ARGUMENT, "input contains non-finite values"
                )
            out = np.empty(n_out * batch, dtype=np.float64)
            for start in range(0, batch, chunk):
                stop = min(start + chunk, batch)
                for col in range(start, stop):
                    xt = colmajor_to_rowmajor(xsb[col * n_in : (col + 1) * n_in], graph.input_shape)
                    yt, _ = forward(graph, xt)
                    out[col * n_out : (col + 1) * n_out] = rowmajor_to_colmajor(yt)
        except ShapeMismatchError as exc:
            return _finish("model_forward_batch", Status.SHAPE_MISMATCH, str(exc))
        except ValidationError as exc:
            return _finish("model_forward_batch", Status.INVALID_ARGUMENT, str(exc))
        ysb[:] = out
        return _finish("model_forward_batch", Status.OK)
    except Exception as exc:
        return _finish("model_forward_batch", Status.INTERNAL_ERROR, repr(exc))


def model_delete(handle: int) -> Status:
    """Release all resources for the handle immediately; double delete is bad-handle."""
    try:
        if _registry.remove(handle):
            return _finish("model_delete", Status.OK)
        return _finish("model_delete", Status.BAD_HANDLE, f"stale or unknown handle {handle}")
    except Exception as exc:
        return _finish("model_delete", Status.INTERNAL_ERROR, repr(exc))

"""Extern implementations for the embedded shared library.

Maps flat C pointers and extents onto tnwp.bridge calls. Importable only
inside the interpreter embedded by tnwp.embed (it needs the generated
tnwp_cabi module). Argument defects detected here (NULL pointers, negative
ranks) report invalid-argument through the same thread-local detail
channel the bridge uses; nothing ever unwinds into the host.
"""

from __future__ import annotations

import numpy as np
from tnwp_cabi import ffi

from tnwp import bridge

_Status = bridge.Status


def _fail(detail: str, status: _Status = _Status.INVALID_ARGUMENT) -> int:
    bridge._tls.detail = detail
    return int(status)


def _extents(ptr, rank: int, name: str) -> tuple[int, ...]:
    rank = int(rank)
    if rank <= 0:
        raise _GlueArgError(f"{name} rank must be positive, got {rank}")
    if ptr == ffi.NULL:
        raise _GlueArgError(f"{name} extents pointer is NULL")
    extents = tuple(int(ptr[i]) for i in range(rank))
    if any(e <= 0 for e in extents):
        raise _GlueArgError(f"{name} extents must be positive, got {extents}")
    return extents


def _f64_view(ptr, count: int, name: str) -> np.ndarray:
    if ptr == ffi.NULL:
        raise _GlueArgError(f"{name} buffer pointer is NULL")
    return np.frombuffer(ffi.buffer(ptr, 8 * count), dtype=np.float64)


class _GlueArgError(Exception):
    pass


@ffi.def_extern()
def tnwp_model_new(path, device, out_handle):
    try:
        if path == ffi.NULL or device == ffi.NULL:
            return _fail("path/device pointer is NULL")
        if out_handle == ffi.NULL:
            return _fail("out_handle pointer is NULL")
        status, token = bridge.model_new(
            ffi.string(path).decode("utf-8", "replace"),
            ffi.string(device).decode("utf-8", "replace"),
        )
        if status == _Status.OK:
            out_handle[0] = token
        return int(status)
    except Exception as exc:
        return _fail(repr(exc), _Status.INTERNAL_ERROR)


@ffi.def_extern()
def tnwp_model_forward(handle, x, x_extents, x_rank, y, y_extents, y_rank):
    try:
        xe = _extents(x_extents, x_rank, "x")
        ye = _extents(y_extents, y_rank, "y")
        xa = _f64_view(x, int(np.prod(xe)), "x")
        ya = _f64_view(y, int(np.prod(ye)), "y")
        return int(bridge.model_forward(int(handle), xa, xe, ya, ye))
    except _GlueArgError as exc:
        return _fail(str(exc))
    except Exception as exc:
        return _fail(repr(exc), _Status.INTERNAL_ERROR)


@ffi.def_extern()
def tnwp_model_tangent(handle, x, x_extents, x_rank, dx, dx_extents, dx_rank,
                       dy, dy_extents, dy_rank):
    try:
        xe = _extents(x_extents, x_rank, "x")
        dxe = _extents(dx_extents, dx_rank, "dx")
        dye = _extents(dy_extents, dy_rank, "dy")
        xa = _f64_view(x, int(np.prod(xe)), "x")
        dxa = _f64_view(dx, int(np.prod(dxe)), "dx")
        dya = _f64_view(dy, int(np.prod(dye)), "dy")
        return int(bridge.model_tangent(int(handle), xa, xe, dxa, dxe, dya, dye))
    except _GlueArgError as exc:
        return _fail(str(exc))
    except Exception as exc:
        return _fail(repr(exc), _Status.INTERNAL_ERROR)


@ffi.def_extern()
def tnwp_model_adjoint(handle, x, x_extents, x_rank, ystar, ystar_extents, ystar_rank,
                       xstar, xstar_extents, xstar_rank):
    try:
        xe = _extents(x_extents, x_rank, "x")
        ye = _extents(ystar_extents, ystar_rank, "ystar")
        xse = _extents(xstar_extents, xstar_rank, "xstar")
        xa = _f64_view(x, int(np.prod(xe)), "x")
        ya = _f64_view(ystar, int(np.prod(ye)), "ystar")
        xsa = _f64_view(xstar, int(np.prod(xse)), "xstar")
        return int(bridge.model_adjoint(int(handle), xa, xe, ya, ye, xsa, xse))
    except _GlueArgError as exc:
        return _fail(str(exc))
    except Exception as exc:
        return _fail(repr(exc), _Status.INTERNAL_ERROR)


@ffi.def_extern()
def tnwp_model_forward_batch(handle, xs, x_extents, x_rank, ys, y_extents, y_rank,
                             batch, chunk):
    try:
        batch = int(batch)
        chunk = int(chunk)
        if batch < 0:
            return _fail(f"batch must be >= 0, got {batch}")
        xe = _extents(x_extents, x_rank, "xs")
        ye = _extents(y_extents, y_rank, "ys")
        if batch == 0:
            return int(bridge.model_forward_batch(int(handle), np.empty(0), xe,
                                                  np.empty(0), ye, 0, chunk))
        xsa = _f64_view(xs, int(np.prod(xe)) * batch, "xs")
        ysa = _f64_view(ys, int(np.prod(ye)) * batch, "ys")
        return int(bridge.model_forward_batch(int(handle), xsa, xe, ysa, ye, batch, chunk))
    except _GlueArgError as exc:
        return _fail(str(exc))
    except Exception as exc:
        return _fail(repr(exc), _Status.INTERNAL_ERROR)


@ffi.def_extern()
def tnwp_model_delete(handle):
    try:
        return int(bridge.model_delete(int(handle)))
    except Exception as exc:
        return _fail(repr(exc), _Status.INTERNAL_ERROR)


@ffi.def_extern()
def tnwp_last_error_detail(buffer, capacity):
    try:
        capacity = int(capacity)
        if buffer == ffi.NULL or capacity <= 0:
            return 0
        data = bridge.last_error_detail(capacity)
        ffi.buffer(buffer, len(data))[:] = data
        return 0
    except Exception:
        return 0

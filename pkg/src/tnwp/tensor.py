"""Dense float64 tensors with explicit layout, plus the kernel set.

Everything inside the engine is row-major float64; column-major buffers
exist only at the foreign boundary and are converted on entry/exit by a
single physical copy (pure index permutation, values untouched). A 32-bit
ingest path widens to float64 on entry; narrowing back is the boundary's
job on exit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ShapeMismatchError, ValidationError


class Layout(Enum):
    ROW_MAJOR = "row_major"
    COL_MAJOR = "col_major"


@dataclass(frozen=True)
class Tensor:
    """Flat float64 array with an explicit shape and flat ordering.

    Invariant: prod(shape) == data.size. Finiteness is enforced at the
    entry points that document it (engine forward, model load), not per
    construction, so intermediate arithmetic stays cheap.
    """

    shape: tuple[int, ...]
    data: np.ndarray
    layout: Layout = field(default=Layout.ROW_MAJOR)

    def __post_init__(self) -> None:
        shape = tuple(int(e) for e in self.shape)
        object.__setattr__(self, "shape", shape)
        if any(e <= 0 for e in shape):
            raise ValidationError(f"tensor extents must be positive, got {shape}")
        data = np.ascontiguousarray(self.data, dtype=np.float64).ravel()
        object.__setattr__(self, "data", data)
        if data.size != _prod(shape):
            raise ShapeMismatchError(
                f"flat buffer has {data.size} elements, shape {shape} needs {_prod(shape)}"
            )

    @classmethod
    def from_array(cls, arr: np.ndarray | list) -> "Tensor":
        """Row-major tensor from an ndarray (or nested lists)."""
        a = np.asarray(arr, dtype=np.float64)
        if a.ndim == 0:
            a = a.reshape(1)
        return cls(tuple(a.shape), np.ascontiguousarray(a).ravel())

    def as_array(self) -> np.ndarray:
        """Shaped row-major ndarray view of the flat data."""
        if self.layout is not Layout.ROW_MAJOR:
            raise ValidationError("as_array is defined for row-major tensors only")
        return self.data.reshape(self.shape)

    @property
    def size(self) -> int:
        return self.data.size


def _prod(shape: tuple[int, ...]) -> int:
    return math.prod(shape) if shape else 1


def colmajor_to_rowmajor(buffer: np.ndarray | list, shape: tuple[int, ...]) -> Tensor:
    """Reinterpret a column-major flat buffer as a row-major Tensor.

    Pure index remapping: the value multiset is preserved bit for bit.
    float32 buffers are widened to float64 on entry.
    """
    shape = tuple(int(e) for e in shape)
    buf = np.asarray(buffer)
    if buf.dtype == np.float32:
        buf = buf.astype(np.float64)
    buf = np.ascontiguousarray(buf, dtype=np.float64).ravel()
    if buf.size != _prod(shape):
        raise ShapeMismatchError(
            f"column-major buffer has {buf.size} elements, shape {shape} needs {_prod(shape)}"
        )
    data = buf.reshape(shape, order="F").ravel(order="C")
    return Tensor(shape, data)


def rowmajor_to_colmajor(t: Tensor) -> np.ndarray:
    """Exact inverse of colmajor_to_rowmajor: flat column-major float64 buffer."""
    if t.layout is not Layout.ROW_MAJOR:
        raise ValidationError("rowmajor_to_colmajor expects a row-major tensor")
    return np.ascontiguousarray(t.data.reshape(t.shape).ravel(order="F"))


def conv1d(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """'Same' 1-D convolution: (C_in, L) -> (C_out, L).

    Odd kernel size K, zero padding (K-1)/2 on both ends so L is preserved.
    Reduction order is fixed: input channels are contracted inside a single
    einsum per kernel tap, taps accumulated in ascending k order; repeated
    calls on identical inputs are bit-identical.
    """
    if len(x.shape) != 2:
        raise ShapeMismatchError(f"conv1d input must be 2-D (C_in, L), got {x.shape}")
    if len(weight.shape) != 3:
        raise ShapeMismatchError(f"conv1d weight must be 3-D (C_out, C_in, K), got {weight.shape}")
    c_out, c_in, k = weight.shape
    if k % 2 != 1:
        raise ValidationError(f"conv1d kernel size must be odd, got {k}")
    if x.shape[0] != c_in:
        raise ShapeMismatchError(
            f"conv1d input has {x.shape[0]} channels, weight expects {c_in}"
        )
    if bias.shape != (c_out,):
        raise ShapeMismatchError(f"conv1d bias must have shape ({c_out},), got {bias.shape}")
    out = _conv1d_raw(x.as_array(), weight.as_array(), bias.as_array())
    return Tensor.from_array(out)


def _conv1d_raw(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    c_out, c_in, k = w.shape
    length = x.shape[1]
    pad = (k - 1) // 2
    xp = np.zeros((c_in, length + 2 * pad), dtype=np.float64)
    xp[:, pad : pad + length] = x
    out = np.repeat(b[:, None], length, axis=1)
    for tap in range(k):
        out += np.einsum("oi,il->ol", w[:, :, tap], xp[:, tap : tap + length])
    return out


def dense(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """Affine map (n,) -> (m,): weight @ x + bias, fixed reduction order."""
    if len(x.shape) != 1:
        raise ShapeMismatchError(f"dense input must be 1-D, got {x.shape}")
    if len(weight.shape) != 2:
        raise ShapeMismatchError(f"dense weight must be 2-D (m, n), got {weight.shape}")
    m, n = weight.shape
    if x.shape != (n,):
        raise ShapeMismatchError(f"dense input must have shape ({n},), got {x.shape}")
    if bias.shape != (m,):
        raise ShapeMismatchError(f"dense bias must have shape ({m},), got {bias.shape}")
    out = _dense_raw(x.data, weight.as_array(), bias.data)
    return Tensor.from_array(out)


def _dense_raw(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("mn,n->m", w, x) + b

"""Self-describing binary model container.

Layout (all integers little-endian):

    bytes 0-3    magic "TNWP"
    bytes 4-7    format version, u32
    bytes 8-15   header length H, u64
    16 .. 16+H   UTF-8 JSON header (space-padded so the blob starts 8-byte
                 aligned): name, input/output shapes, ordered layer list;
                 each parameter entry records {shape, offset, nbytes} into
                 the blob
    16+H ..      parameter blob, float64 little-endian, concatenated in
                 header order

The writer is canonical: save -> load -> save reproduces the file byte for
byte.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError, ShapeMismatchError, ValidationError
from .graph import ModelGraph, validate_graph
from .layers import LayerKind, LayerSpec
from .tensor import Tensor

MAGIC = b"TNWP"
_FIXED_HEADER = struct.Struct("<4sIQ")


def save_model(graph: ModelGraph, path: str | Path) -> None:
    """Validate and write the container; nothing is written on a validation error."""
    validate_graph(graph)

    layer_entries = []
    blob_parts: list[bytes] = []
    offset = 0
    for layer in graph.layers:
        params_entry = {}
        for name, tensor in layer.params.items():
            raw = tensor.data.astype("<f8").tobytes()
            params_entry[name] = {
                "shape": list(tensor.shape),
                "offset": offset,
                "nbytes": len(raw),
            }
            blob_parts.append(raw)
            offset += len(raw)
        layer_entries.append(
            {"kind": layer.kind.value, "meta": dict(layer.meta), "params": params_entry}
        )

    header = {
        "name": graph.name,
        "input_shape": list(graph.input_shape),
        "output_shape": list(graph.output_shape),
        "layers": layer_entries,
    }
    header_bytes = json.dumps(header, ensure_ascii=True, separators=(",", ":")).encode("utf-8")
    if len(header_bytes) % 8:
        header_bytes += b" " * (8 - len(header_bytes) % 8)

    with open(path, "wb") as fh:
        fh.write(_FIXED_HEADER.pack(MAGIC, graph.format_version, len(header_bytes)))
        fh.write(header_bytes)
        for part in blob_parts:
            fh.write(part)


def load_model(path: str | Path) -> ModelGraph:
    """Read and validate a container; load(save(g)) is bit-identical to g."""
    with open(path, "rb") as fh:
        raw = fh.read()

    if len(raw) < _FIXED_HEADER.size:
        raise FormatError(f"file too short for fixed header: {len(raw)} bytes")
    magic, version, header_len = _FIXED_HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != 1:
        raise FormatError(f"unsupported format version {version}")
    if len(raw) < _FIXED_HEADER.size + header_len:
        raise FormatError(
            f"truncated header: expected {header_len} bytes, got "
            f"{len(raw) - _FIXED_HEADER.size}"
        )
    try:
        header = json.loads(raw[_FIXED_HEADER.size : _FIXED_HEADER.size + header_len])
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"unreadable JSON header: {exc}") from None

    blob = raw[_FIXED_HEADER.size + header_len :]
    expected_blob = 0
    for entry in header.get("layers", []):
        for meta in entry.get("params", {}).values():
            expected_blob = max(expected_blob, meta["offset"] + meta["nbytes"])
    if len(blob) != expected_blob:
        raise FormatError(
            f"truncated parameter blob: expected {expected_blob} bytes, got {len(blob)}"
        )

    layers = []
    for entry in header.get("layers", []):
        try:
            kind = LayerKind(entry["kind"])
        except ValueError:
            raise FormatError(f"unknown layer kind {entry.get('kind')!r}") from None
        params = {}
        for name, meta in entry.get("params", {}).items():
            shape = tuple(int(e) for e in meta["shape"])
            count = int(np.prod(shape)) if shape else 1
            if meta["nbytes"] != 8 * count:
                raise FormatError(
                    f"parameter {name!r}: {meta['nbytes']} bytes inconsistent with shape {shape}"
                )
            data = np.frombuffer(blob, dtype="<f8", count=count, offset=meta["offset"])
            params[name] = Tensor(shape, data.copy())
        layers.append(LayerSpec(kind, params, dict(entry.get("meta", {}))))

    try:
        graph = ModelGraph(
            name=header["name"],
            input_shape=tuple(header["input_shape"]),
            output_shape=tuple(header["output_shape"]),
            layers=layers,
            format_version=version,
        )
    except KeyError as exc:
        raise FormatError(f"header is missing field {exc}") from None
    try:
        validate_graph(graph)
    except (ValidationError, ShapeMismatchError) as exc:
        raise FormatError(f"container violates graph invariants: {exc}") from None
    return graph

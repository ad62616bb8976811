"""Builds the foreign-callable shared library and its interface header.

The library embeds the interpreter and exports the seven `tnwp_` symbols
with the platform's default flat calling convention; hosts link it (or
dlopen it) and include the generated header. A constructor inside the
library promotes libpython to the global symbol namespace so interpreter
extension modules resolve even when the host dlopens us with RTLD_LOCAL.

Usage:
    python -m tnwp.embed --out build               # build build/libtnwp.so
    python -m tnwp.embed --write-header include/tnwp.h
"""

from __future__ import annotations

import argparse
import sysconfig
from pathlib import Path

ABI_VERSION = 1

_STATUS_DEFINES = """\
#define TNWP_OK 0
#define TNWP_BAD_HANDLE 1
#define TNWP_SHAPE_MISMATCH 2
#define TNWP_IO_ERROR 3
#define TNWP_DEVICE_UNAVAILABLE 4
#define TNWP_INVALID_ARGUMENT 5
#define TNWP_INTERNAL_ERROR 6
"""

# One prototype per line; host-side binding generators key off this shape.
PROTOTYPES = """\
int32_t tnwp_model_new(const char *path, const char *device, int64_t *out_handle);
int32_t tnwp_model_forward(int64_t handle, const double *x, const int64_t *x_extents, int64_t x_rank, double *y, const int64_t *y_extents, int64_t y_rank);
int32_t tnwp_model_tangent(int64_t handle, const double *x, const int64_t *x_extents, int64_t x_rank, const double *dx, const int64_t *dx_extents, int64_t dx_rank, double *dy, const int64_t *dy_extents, int64_t dy_rank);
int32_t tnwp_model_adjoint(int64_t handle, const double *x, const int64_t *x_extents, int64_t x_rank, const double *ystar, const int64_t *ystar_extents, int64_t ystar_rank, double *xstar, const int64_t *xstar_extents, int64_t xstar_rank);
int32_t tnwp_model_forward_batch(int64_t handle, const double *xs, const int64_t *x_extents, int64_t x_rank, double *ys, const int64_t *y_extents, int64_t y_rank, int64_t batch, int64_t chunk);
int32_t tnwp_model_delete(int64_t handle);
int32_t tnwp_last_error_detail(char *buffer, int64_t capacity);
"""


def header_text() -> str:
    """Canonical interface header; the checked-in copy must match this exactly."""
    return f"""/* tnwp flat procedural boundary.
 *
 * All multi-dimensional buffers are COLUMN-MAJOR; extents travel as int64
 * arrays plus a rank. Every call returns one of the TNWP_* status codes
 * below and never unwinds into the host. Error details for the calling
 * thread's most recent failure are available via tnwp_last_error_detail.
 *
 * Batched forward appends the batch as the last (slowest) column-major
 * dimension, so each column is contiguous in the host buffer.
 *
 * Generated by `python -m tnwp.embed --write-header`; do not edit.
 */
#ifndef TNWP_H
#define TNWP_H

#include <stdint.h>

#define TNWP_ABI_VERSION {ABI_VERSION}

{_STATUS_DEFINES}
#ifdef __cplusplus
extern "C" {{
#endif

{PROTOTYPES}
#ifdef __cplusplus
}}
#endif

#endif /* TNWP_H */
"""


def _c_shim() -> str:
    soname = sysconfig.get_config_var("INSTSONAME")
    return f"""
#include <dlfcn.h>

/* Hosts may dlopen this library with RTLD_LOCAL; the embedded
   interpreter's own extension modules then fail to resolve libpython
   symbols. Promote libpython to the global namespace up front. */
__attribute__((constructor))
static void _tnwp_promote_libpython(void) {{
    dlopen("{soname}", RTLD_NOW | RTLD_GLOBAL);
}}
"""


def build(out_dir: str | Path = "build", lib_name: str = "libtnwp.so") -> Path:
    """Compile the embedding shared library into out_dir."""
    import cffi

    out = Path(out_dir).resolve()
    out.mkdir(parents=True, exist_ok=True)
    src_dir = Path(__file__).resolve().parents[1]

    ffi = cffi.FFI()
    ffi.embedding_api(PROTOTYPES)
    ffi.set_source("tnwp_cabi", _c_shim())
    ffi.embedding_init_code(
        f"""
import sys

for entry in ({str(src_dir)!r},):
    if entry not in sys.path:
        sys.path.insert(0, entry)

import tnwp._embed_glue  # registers the extern implementations
"""
    )
    ffi.compile(tmpdir=str(out), target=lib_name, verbose=False)
    return out / lib_name


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="python -m tnwp.embed", description=__doc__)
    parser.add_argument("--out", default=None, help="build the shared library into this directory")
    parser.add_argument("--write-header", default=None, help="write the interface header here")
    args = parser.parse_args(argv)
    if args.write_header:
        Path(args.write_header).write_text(header_text(), encoding="ascii")
        print(args.write_header)
    if args.out:
        print(build(args.out))
    if not args.write_header and not args.out:
        parser.error("nothing to do: pass --out and/or --write-header")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

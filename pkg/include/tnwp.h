/* tnwp flat procedural boundary.
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

#define TNWP_ABI_VERSION 1

#define TNWP_OK 0
#define TNWP_BAD_HANDLE 1
#define TNWP_SHAPE_MISMATCH 2
#define TNWP_IO_ERROR 3
#define TNWP_DEVICE_UNAVAILABLE 4
#define TNWP_INVALID_ARGUMENT 5
#define TNWP_INTERNAL_ERROR 6

#ifdef __cplusplus
extern "C" {
#endif

int32_t tnwp_model_new(const char *path, const char *device, int64_t *out_handle);
int32_t tnwp_model_forward(int64_t handle, const double *x, const int64_t *x_extents, int64_t x_rank, double *y, const int64_t *y_extents, int64_t y_rank);
int32_t tnwp_model_tangent(int64_t handle, const double *x, const int64_t *x_extents, int64_t x_rank, const double *dx, const int64_t *dx_extents, int64_t dx_rank, double *dy, const int64_t *dy_extents, int64_t dy_rank);
int32_t tnwp_model_adjoint(int64_t handle, const double *x, const int64_t *x_extents, int64_t x_rank, const double *ystar, const int64_t *ystar_extents, int64_t ystar_rank, double *xstar, const int64_t *xstar_extents, int64_t xstar_rank);
int32_t tnwp_model_forward_batch(int64_t handle, const double *xs, const int64_t *x_extents, int64_t x_rank, double *ys, const int64_t *y_extents, int64_t y_rank, int64_t batch, int64_t chunk);
int32_t tnwp_model_delete(int64_t handle);
int32_t tnwp_last_error_detail(char *buffer, int64_t capacity);

#ifdef __cplusplus
}
#endif

#endif /* TNWP_H */

#ifndef ANALYTICITY_LAB_H
#define ANALYTICITY_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LabMode {
  LAB_MODE_DIRICHLET = 0,
  LAB_MODE_CONORMAL = 1,
} LabMode;

typedef enum LabStatus {
  LAB_STATUS_OK = 0,
  LAB_STATUS_NULL_POINTER = 1,
  LAB_STATUS_INVALID_ARGUMENT = 2,
  LAB_STATUS_IO = 3,
  LAB_STATUS_CONFIG = 4,
  LAB_STATUS_NUMERICAL = 5,
  LAB_STATUS_PANIC = 6,
} LabStatus;

/**
 * Opaque grid-sampled field.
 */
typedef struct LabField LabField;

/**
 * Opaque time series of fields.
 */
typedef struct LabSeries LabSeries;

typedef struct LabProjectionReport {
  double identity_residual;
  double h_residual;
  double div_q;
  double normal_trace;
  double fprime_max;
} LabProjectionReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *lab_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *lab_version(void);

/**
 * Builds a field from `shape[0..n]`, `origin[0..n]`, spacing `h` and
 * `values` laid out node-major with `components` entries per node.
 *
 * # Safety
 * Pointers must be valid for the stated lengths; `out` must be writable.
 */
enum LabStatus lab_field_new(size_t n,
                             const size_t *shape,
                             const double *origin,
                             double h,
                             bool halfspace,
                             size_t components,
                             const double *values,
                             size_t len,
                             struct LabField **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum LabStatus lab_field_read(const char *path, struct LabField **out);

/**
 * # Safety
 * `field` must come from this library; `path` must be NUL-terminated.
 */
enum LabStatus lab_field_write(const struct LabField *field, const char *path);

/**
 * Releases a field; null is ignored.
 *
 * # Safety
 * `field` must come from this library and not be used afterwards.
 */
void lab_field_free(struct LabField *field);

/**
 * Node count, component count and spatial dimension of a field.
 *
 * # Safety
 * `field` must come from this library; each out pointer may be null.
 */
enum LabStatus lab_field_info(const struct LabField *field,
                              size_t *nodes,
                              size_t *components,
                              size_t *dim);

/**
 * Copies the values into `buf`, which must hold nodes * components entries.
 *
 * # Safety
 * `buf` must be writable for `len` doubles.
 */
enum LabStatus lab_field_values(const struct LabField *field, double *buf, size_t len);

/**
 * Reflects a half-space field across x_n = 0. Scalars, flux vectors and
 * coefficient tensors are told apart by the component count.
 *
 * # Safety
 * `field` must come from this library; `out` must be writable.
 */
enum LabStatus lab_extend(const struct LabField *field, enum LabMode mode, struct LabField **out);

/**
 * Restriction of a mirrored field back onto the grid of `half`.
 *
 * # Safety
 * Both handles must come from this library; `out` must be writable.
 */
enum LabStatus lab_restrict(const struct LabField *field,
                            const struct LabField *half,
                            struct LabField **out);

/**
 * Builds F' from an n*n source tensor and fills `report`.
 *
 * # Safety
 * `source` must come from this library; `out` must be writable; `report` may be null.
 */
enum LabStatus lab_project(const struct LabField *source,
                           double boundary_tol,
                           struct LabField **out,
                           struct LabProjectionReport *report);

/**
 * Evaluates kernel `name` (E, N, Nminus, Gamma, G, Gstar, K) at `x`, `y`
 * in dimension `n`. `t < 0` means no time argument; `sign` is +1, -1 or 0.
 *
 * # Safety
 * `name` must be NUL-terminated; `x`, `y` must hold `n` doubles; `out` must be writable.
 */
enum LabStatus lab_kernel_eval(const char *name,
                               size_t i,
                               size_t j,
                               size_t q,
                               double t,
                               const double *x,
                               const double *y,
                               size_t n,
                               int32_t sign,
                               size_t deriv,
                               double *out);

/**
 * Radius estimate from a derivative ladder `d[0..len]`.
 *
 * # Safety
 * `d` must hold `len` doubles; `delta` must be writable; `lower_bound_only` may be null.
 */
enum LabStatus lab_radius_estimate(const double *d,
                                   size_t len,
                                   double cap,
                                   double *delta,
                                   bool *lower_bound_only);

/**
 * Suprema of the combinatorial sum ratio over k <= k_max / 2 and k <= k_max.
 *
 * # Safety
 * Out pointers must be writable.
 */
enum LabStatus lab_sum_ratio(size_t k_max, double *sup_half, double *sup_full);

/**
 * # Safety
 * `dir` must be NUL-terminated; `out` must be writable.
 */
enum LabStatus lab_series_read(const char *dir, struct LabSeries **out);

/**
 * # Safety
 * `series` must come from this library and not be used afterwards.
 */
void lab_series_free(struct LabSeries *series);

/**
 * Number of snapshots, or 0 for a null handle.
 *
 * # Safety
 * `series` must be null or come from this library.
 */
size_t lab_series_len(const struct LabSeries *series);

/**
 * Time and a copy of snapshot `index`.
 *
 * # Safety
 * `series` must come from this library; out pointers must be writable.
 */
enum LabStatus lab_series_get(const struct LabSeries *series,
                              size_t index,
                              double *time,
                              struct LabField **out);

/**
 * Runs a catalog experiment config, writing artifacts to `out_dir`.
 * `exit_code` receives 0 when all criteria pass, 1 on a failed criterion
 * and 2 on a config error; the status reports only whether the run happened.
 *
 * # Safety
 * Strings must be NUL-terminated; `exit_code` must be writable.
 */
enum LabStatus lab_run_config(const char *config, const char *out_dir, int32_t *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANALYTICITY_LAB_H */

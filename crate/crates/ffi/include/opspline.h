#ifndef OPSPLINE_H
#define OPSPLINE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Offset side.
 */
typedef enum OpsSide {
  OPS_SIDE_INTERIOR = 0,
  OPS_SIDE_EXTERIOR = 1,
} OpsSide;

/*
 Result codes.
 */
typedef enum OpsStatus {
  OPS_STATUS_OK = 0,
  OPS_STATUS_NULL_POINTER = 1,
  OPS_STATUS_INVALID_INPUT = 2,
  OPS_STATUS_DOMAIN = 3,
  OPS_STATUS_SINGULAR_MATRIX = 4,
  OPS_STATUS_RANK_DEFICIENT = 5,
  OPS_STATUS_SINGULAR_KKT = 6,
  OPS_STATUS_DEGENERATE_GCV = 7,
  OPS_STATUS_CUSP_SINGULARITY = 8,
  OPS_STATUS_UNKNOWN_TEST_FUNCTION = 9,
  OPS_STATUS_IO = 10,
  OPS_STATUS_PARSE = 11,
  OPS_STATUS_BUFFER_TOO_SMALL = 12,
  OPS_STATUS_PANIC = 13,
} OpsStatus;

/*
 Samples `(x_i, y_i)` with strictly increasing abscissae.
 */
typedef struct OpsDataset OpsDataset;

/*
 Result of a full experiment run.
 */
typedef struct OpsReport OpsReport;

/*
 A cubic spline on a uniform knot vector.
 */
typedef struct OpsSpline OpsSpline;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null after a success.
 The pointer stays valid until the next call into this library on the
 same thread.
 */
const char *ops_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *ops_version(void);

/*
 Copies `len` samples into a new dataset.

 # Safety
 `xs` and `ys` must point to `len` readable doubles; `out` must be writable.
 */
enum OpsStatus ops_dataset_new(const double *xs,
                               const double *ys,
                               size_t len,
                               struct OpsDataset **out);

/*
 Samples a builtin test function (`"p1"`, `"p2"`, `"line"`) at `m` uniform
 points with absolute Gaussian noise of deviation `sigma`.

 # Safety
 `name` must be a NUL-terminated string; `out` must be writable.
 */
enum OpsStatus ops_dataset_builtin(const char *name,
                                   size_t m,
                                   double sigma,
                                   uint64_t seed,
                                   struct OpsDataset **out);

/*
 Number of samples.

 # Safety
 `d` must be a live dataset handle or null.
 */
size_t ops_dataset_len(const struct OpsDataset *d);

/*
 # Safety
 `d` must be null or a handle from this library not yet freed.
 */
void ops_dataset_free(struct OpsDataset *d);

/*
 Selects `(mu, lambda)` by GCV and fits the penalized generator spline on a
 uniform basis of dimension `n` (0 picks a default from the sample count).

 # Safety
 `d` must be a live dataset; `out` must be writable; `mu` and `lambda` may be null.
 */
enum OpsStatus ops_fit_tp(const struct OpsDataset *d,
                          size_t n,
                          struct OpsSpline **out,
                          double *mu,
                          double *lambda);

/*
 Value (`deriv = 0`) or derivative of order `deriv <= 2` at `x`.

 # Safety
 `s` must be a live spline; `out` must be writable.
 */
enum OpsStatus ops_spline_eval(const struct OpsSpline *s, double x, uint32_t deriv, double *out);

/*
 Domain `[a, b]` of the spline.

 # Safety
 `s` must be a live spline; `a` and `b` must be writable.
 */
enum OpsStatus ops_spline_domain(const struct OpsSpline *s, double *a, double *b);

/*
 Copies the coefficients into `buf` of capacity `cap` and stores their
 count in `len`. With too small a buffer only `len` is written and
 `BUFFER_TOO_SMALL` is returned.

 # Safety
 `s` must be a live spline; `buf` must hold `cap` doubles; `len` must be writable.
 */
enum OpsStatus ops_spline_coefficients(const struct OpsSpline *s,
                                       double *buf,
                                       size_t cap,
                                       size_t *len);

/*
 # Safety
 `s` must be null or a handle from this library not yet freed.
 */
void ops_spline_free(struct OpsSpline *s);

/*
 Offset spline of `g` at distance `tau > 0` on `side` with `q` constraint
 and `p` refinement abscissae (0 picks the defaults).

 # Safety
 `g` must be a live spline; `out` must be writable.
 */
enum OpsStatus ops_offset_spline(const struct OpsSpline *g,
                                 double tau,
                                 enum OpsSide side,
                                 size_t q,
                                 size_t p,
                                 struct OpsSpline **out);

/*
 Reconstructs `g` from its offset spline `f` (built with the same `tau`,
 `side`, `q`, `p`), with or without tangent refinement.

 # Safety
 `g` and `f` must be live splines; `out` must be writable.
 */
enum OpsStatus ops_bi_offset(const struct OpsSpline *g,
                             const struct OpsSpline *f,
                             double tau,
                             enum OpsSide side,
                             size_t q,
                             size_t p,
                             bool refined,
                             struct OpsSpline **out);

/*
 Number of cusps of the offset of `g` at signed distance `signed_tau`.

 # Safety
 `g` must be a live spline; `count` must be writable.
 */
enum OpsStatus ops_cusp_count(const struct OpsSpline *g, double signed_tau, size_t *count);

/*
 Mean squared difference of two splines at `samples` uniform points over
 the domain of `a`.

 # Safety
 `a` and `b` must be live splines; `out` must be writable.
 */
enum OpsStatus ops_mse(const struct OpsSpline *a,
                       const struct OpsSpline *b,
                       size_t samples,
                       double *out);

/*
 Runs the full experiment described by a TOML configuration (null or
 empty for the defaults).

 # Safety
 `config_toml` must be null or NUL-terminated; `out` must be writable.
 */
enum OpsStatus ops_pipeline_run(const char *config_toml, struct OpsReport **out);

/*
 Number of `(tau, side)` cells.

 # Safety
 `r` must be a live report handle or null.
 */
size_t ops_report_cells(const struct OpsReport *r);

/*
 Model-relative bi-offset MSE of the penalized model in cell `index`.
 Returns the cell's stage error if it failed.

 # Safety
 `r` must be a live report; the out pointers must be writable (`tau`, `side` may be null).
 */
enum OpsStatus ops_report_cell(const struct OpsReport *r,
                               size_t index,
                               bool refined,
                               double *tau,
                               enum OpsSide *side,
                               double *mse);

/*
 Writes `curves.csv`, `report.csv`, `metrics.csv` and `figure.svg` into `dir`.

 # Safety
 `r` must be a live report; `dir` must be NUL-terminated.
 */
enum OpsStatus ops_report_write(const struct OpsReport *r, const char *dir);

/*
 # Safety
 `r` must be null or a handle from this library not yet freed.
 */
void ops_report_free(struct OpsReport *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OPSPLINE_H */

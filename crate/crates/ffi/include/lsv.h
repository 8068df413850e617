/* Generated by cbindgen from crates/ffi. Do not edit. */

#ifndef LSV_H
#define LSV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define LSV_ENSEMBLE_GAUSSIAN 0

#define LSV_ENSEMBLE_RADEMACHER 1

#define LSV_ENSEMBLE_UNIFORM 2

#define LSV_ENSEMBLE_STUDENT_T5 3

#define LSV_DIRECTION_UPPER 0

#define LSV_DIRECTION_LOWER 1

// Result codes. `LSV_STATUS_OK` is zero; every other value is an error.
typedef enum {
  LSV_STATUS_OK = 0,
  LSV_STATUS_NULL_POINTER = 1,
  LSV_STATUS_INVALID_ARGUMENT = 2,
  LSV_STATUS_SINGULAR_MATRIX = 3,
  LSV_STATUS_NON_SQUARE = 4,
  LSV_STATUS_DIMENSION_MISMATCH = 5,
  LSV_STATUS_NUMERICALLY_DEPENDENT = 6,
  LSV_STATUS_INVALID_DIMENSION = 7,
  LSV_STATUS_DEGENERATE_GEOMETRY = 8,
  LSV_STATUS_ENUMERATION_TOO_LARGE = 9,
  LSV_STATUS_INSUFFICIENT_DATA = 10,
  LSV_STATUS_NON_FINITE = 11,
  LSV_STATUS_BUFFER_TOO_SMALL = 12,
  LSV_STATUS_PANIC = 13,
} LsvStatus;

// Opaque square or rectangular real matrix.
typedef struct LsvMatrix LsvMatrix;

// Scalar part of a witness audit.
typedef struct {
  size_t n;
  // 1-based index of the distinguished column.
  size_t distinguished_column;
  double norm_x;
  double ainv_x_norm;
  double ratio_sum_sq;
  double s_n;
  // `norm_x / ainv_x_norm`, an upper bound on `s_n`.
  double implied_bound;
  // Number of failed checks; zero for a clean audit.
  size_t violation_count;
} LsvWitnessSummary;

typedef struct {
  // 1 when an admissible `theta <= theta_max` was found, else 0.
  int32_t bounded;
  // NaN when unbounded.
  double theta_star;
  double achieved_dist;
  double slack;
  double grid_step;
} LsvLcdResult;

typedef struct {
  uint64_t trials;
  uint64_t hits;
  double p_hat;
  // Wilson 95% interval.
  double ci_low;
  double ci_high;
} LsvSmallBall;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies a `rows x cols` row-major array into a new matrix handle.
//
// # Safety
// `data` must point to `rows * cols` readable doubles; `out` must be a
// valid pointer.
LsvStatus lsv_matrix_from_row_major(size_t rows, size_t cols, const double *data, LsvMatrix **out);

// Draws an `n x n` matrix with i.i.d. entries from the given ensemble.
// The result depends only on `(ensemble, n, master_seed, stream_index)`.
//
// # Safety
// `out` must be a valid pointer.
LsvStatus lsv_matrix_sample(int32_t ensemble_code,
                            size_t n,
                            uint64_t master_seed,
                            uint64_t stream_index,
                            LsvMatrix **out);

// Releases a matrix handle. Null is ignored.
//
// # Safety
// `m` must be null or a handle from this library not yet freed.
void lsv_matrix_free(LsvMatrix *m);

// Number of rows, or 0 for a null handle.
//
// # Safety
// `m` must be null or a live handle.
size_t lsv_matrix_rows(const LsvMatrix *m);

// Number of columns, or 0 for a null handle.
//
// # Safety
// `m` must be null or a live handle.
size_t lsv_matrix_cols(const LsvMatrix *m);

// Copies the entries in row-major order into `buf`, which must hold at
// least `rows * cols` doubles.
//
// # Safety
// `buf` must point to `len` writable doubles.
LsvStatus lsv_matrix_copy_row_major(const LsvMatrix *m, double *buf, size_t len);

// Smallest singular value of a square matrix; 0 when it is numerically
// singular.
//
// # Safety
// `m` must be a live handle and `out` a valid pointer.
LsvStatus lsv_smallest_singular_value(const LsvMatrix *m, double *out);

// Builds the witness vector with column `column` (0-based) distinguished
// and audits every identity it relies on.
//
// # Safety
// `m` must be a live handle and `out` a valid pointer.
LsvStatus lsv_witness_audit(const LsvMatrix *m, size_t column, LsvWitnessSummary *out);

// As [`lsv_witness_audit`], returning the full report as JSON.
//
// # Safety
// `m` must be a live handle and `out` a valid pointer. Release the string
// with [`lsv_string_free`].
LsvStatus lsv_witness_audit_json(const LsvMatrix *m, size_t column, char **out);

// Least common denominator of `a` (length `n`). A nonpositive
// `grid_step` selects the default step. When `certificate` is non-null it
// receives the `n` coordinates of the nearest lattice point.
//
// # Safety
// `a` must point to `n` doubles, `certificate` must be null or point to
// `n` writable `int64_t`, and `out` must be a valid pointer.
LsvStatus lsv_lcd_vector(const double *a,
                         size_t n,
                         double alpha,
                         double gamma,
                         double theta_max,
                         double grid_step,
                         int64_t *certificate,
                         LsvLcdResult *out);

// Monte Carlo estimate of `P(|sum_i w_i xi_i| <= epsilon)` for unit-norm
// weights `w` of length `n` and i.i.d. `xi` from the ensemble.
//
// # Safety
// `weights` must point to `n` doubles and `out` must be a valid pointer.
LsvStatus lsv_small_ball(const double *weights,
                         size_t n,
                         int32_t ensemble_code,
                         double epsilon,
                         uint64_t trials,
                         uint64_t master_seed,
                         LsvSmallBall *out);

// Runs a tail sweep and returns the CSV table, byte-identical to the
// `lsv tail` output for the same arguments.
//
// # Safety
// `n_values` and `k_values` must point to `n_len` and `k_len` readable
// values and `out` must be a valid pointer. Release the string with
// [`lsv_string_free`].
LsvStatus lsv_tail_sweep_csv(int32_t ensemble_code,
                             const size_t *n_values,
                             size_t n_len,
                             const double *k_values,
                             size_t k_len,
                             uint64_t trials,
                             uint64_t master_seed,
                             int32_t direction,
                             char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a string from this library not yet freed.
void lsv_string_free(char *s);

// Message for the most recent failure on the calling thread, or null
// after a success. Valid until the next call into this library on the
// same thread.
const char *lsv_last_error(void);

// Library version, e.g. `"0.1.0"`. Static storage.
const char *lsv_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LSV_H */
